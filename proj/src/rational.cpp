#include "vertexkit/rational.hpp"

#include "vertexkit/errors.hpp"

namespace vertexkit {

Q binom(long n, long k) {
    if (k < 0) return Q(0);
    mpz_class num = 1, den = 1;
    for (long i = 0; i < k; ++i) {
        num *= (n - i);
        den *= (i + 1);
    }
    Q r(num, den);
    r.canonicalize();
    return r;
}

std::string to_string(const Q& q) { return q.get_str(); }

Q parse_rational(std::string_view text) {
    std::string s(text);
    auto a = s.find_first_not_of(" \t");
    auto b = s.find_last_not_of(" \t");
    if (a == std::string::npos) fail("ParseError", "empty rational");
    s = s.substr(a, b - a + 1);
    if (!s.empty() && s[0] == '+') s.erase(0, 1);
    Q r;
    if (r.set_str(s, 10) != 0) fail("ParseError", "bad rational '" + s + "'");
    if (r.get_den() == 0) fail("ParseError", "zero denominator in '" + s + "'");
    r.canonicalize();
    return r;
}

}  // namespace vertexkit
