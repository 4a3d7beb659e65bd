#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace vertexkit {

using Q = mpq_class;

// Generalised binomial; negative n gives (-1)^k C(k-n-1, k).  Zero for k < 0.
Q binom(long n, long k);

// n/d in lowest terms; mpq_class(n, d) alone leaves the fraction unreduced.
inline Q ratio(long n, long d) {
    Q q(n, d);
    q.canonicalize();
    return q;
}

std::string to_string(const Q& q);
Q parse_rational(std::string_view text);

}  // namespace vertexkit
