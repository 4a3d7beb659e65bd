#pragma once

#include "vertexkit/rational.hpp"

#include <utility>
#include <vector>

namespace vertexkit {

// Sparse coefficient vector over a module basis; entries sorted by index,
// zeros never stored.
class Vec {
public:
    Vec() = default;
    static Vec unit(int i, const Q& c = Q(1));

    bool empty() const { return e_.empty(); }
    std::size_t size() const { return e_.size(); }
    const std::vector<std::pair<int, Q>>& entries() const { return e_; }
    Q get(int i) const;
    int max_index() const { return e_.empty() ? -1 : e_.back().first; }

    void add(int i, const Q& c);
    void axpy(const Q& c, const Vec& v);  // this += c*v
    Vec& operator+=(const Vec& v) { axpy(Q(1), v); return *this; }
    Vec& operator-=(const Vec& v) { axpy(Q(-1), v); return *this; }
    Vec& operator*=(const Q& c);

    friend Vec operator+(Vec a, const Vec& b) { a += b; return a; }
    friend Vec operator-(Vec a, const Vec& b) { a -= b; return a; }
    friend Vec operator*(const Q& c, Vec v) { v *= c; return v; }
    friend Vec operator-(Vec v) { v *= Q(-1); return v; }
    friend bool operator==(const Vec& a, const Vec& b) { return a.e_ == b.e_; }

private:
    std::vector<std::pair<int, Q>> e_;
};

}  // namespace vertexkit
