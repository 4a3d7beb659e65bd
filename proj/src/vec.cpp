#include "vertexkit/vec.hpp"

#include <algorithm>

namespace vertexkit {

Vec Vec::unit(int i, const Q& c) {
    Vec v;
    v.add(i, c);
    return v;
}

Q Vec::get(int i) const {
    auto it = std::lower_bound(e_.begin(), e_.end(), i,
                               [](const auto& p, int k) { return p.first < k; });
    if (it != e_.end() && it->first == i) return it->second;
    return Q(0);
}

void Vec::add(int i, const Q& c0) {
    Q c = c0;
    c.canonicalize();
    if (c == 0) return;
    auto it = std::lower_bound(e_.begin(), e_.end(), i,
                               [](const auto& p, int k) { return p.first < k; });
    if (it != e_.end() && it->first == i) {
        it->second += c;
        if (it->second == 0) e_.erase(it);
    } else {
        e_.insert(it, {i, c});
    }
}

void Vec::axpy(const Q& c, const Vec& v) {
    if (c == 0 || v.e_.empty()) return;
    std::vector<std::pair<int, Q>> out;
    out.reserve(e_.size() + v.e_.size());
    auto a = e_.begin();
    auto b = v.e_.begin();
    while (a != e_.end() || b != v.e_.end()) {
        if (b == v.e_.end() || (a != e_.end() && a->first < b->first)) {
            out.push_back(std::move(*a++));
        } else if (a == e_.end() || b->first < a->first) {
            out.emplace_back(b->first, c * b->second);
            ++b;
        } else {
            Q s = a->second + c * b->second;
            if (s != 0) out.emplace_back(a->first, std::move(s));
            ++a;
            ++b;
        }
    }
    e_ = std::move(out);
}

Vec& Vec::operator*=(const Q& c) {
    if (c == 0) {
        e_.clear();
        return *this;
    }
    if (c == 1) return *this;
    if (c == -1) {
        for (auto& [i, q] : e_) mpq_neg(q.get_mpq_t(), q.get_mpq_t());
        return *this;
    }
    for (auto& [i, q] : e_) q *= c;
    return *this;
}

}  // namespace vertexkit
