#include "vertexkit/module.hpp"

#include "vertexkit/errors.hpp"
#include "vertexkit/text.hpp"

#include <sstream>

namespace vertexkit {

GModule::GModule(std::string name, std::vector<std::string> basis, std::vector<int> weights,
                 std::vector<Vec> t_columns, std::optional<int> cutoff)
    : name_(std::move(name)), basis_(std::move(basis)), weights_(std::move(weights)),
      t_(std::move(t_columns)), cutoff_(cutoff) {
    int n = dim();
    if (int(weights_.size()) != n || int(t_.size()) != n)
        fail("ModuleMismatch", "basis, weights and T columns differ in size");
    for (int j = 0; j < n; ++j) {
        if (weights_[j] < 0) fail("InvalidModule", "negative weight on " + basis_[j]);
        for (const auto& [i, c] : t_[j].entries()) {
            if (i < 0 || i >= n) fail("InvalidModule", "T column out of range");
            if (weights_[i] != weights_[j] + 1)
                fail("InvalidModule", "T must raise weight by one: " + basis_[j] + " -> " + basis_[i]);
        }
        if (cutoff_ && weights_[j] > *cutoff_)
            fail("InvalidModule", "basis vector " + basis_[j] + " above cutoff");
    }
}

ModulePtr GModule::scalars() {
    static ModulePtr s = [] {
        auto m = std::make_shared<GModule>("Q", std::vector<std::string>{"1"}, std::vector<int>{0},
                                           std::vector<Vec>{Vec{}});
        m->scalar_ = true;
        return ModulePtr(m);
    }();
    return s;
}

int GModule::index_of(const std::string& b) const {
    for (int i = 0; i < dim(); ++i)
        if (basis_[i] == b) return i;
    return -1;
}

Vec GModule::apply_T(const Vec& v) const {
    Vec r;
    for (const auto& [j, c] : v.entries()) r.axpy(c, t_[j]);
    return r;
}

Vec GModule::apply_divided_T(const Vec& v, int k) const {
    Vec r = v;
    for (int i = 1; i <= k && !r.empty(); ++i) r = Q(1, i) * apply_T(r);
    return r;
}

bool GModule::t_nilpotent_on(const Vec& v) const { return apply_T(v).empty(); }

ModulePtr polynomial_module(int W, const std::string& var) {
    std::vector<std::string> names;
    std::vector<int> w;
    std::vector<Vec> t;
    for (int k = 0; k <= W; ++k) {
        names.push_back(k == 0 ? "1" : (k == 1 ? var : var + "^" + std::to_string(k)));
        w.push_back(W - k);
        t.push_back(k == 0 ? Vec{} : Vec::unit(k - 1, Q(k)));
    }
    return std::make_shared<GModule>(var + "-poly", names, w, t, W);
}

std::string format_vec(const GModule& m, const Vec& v) {
    if (v.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [i, c] : v.entries()) {
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0) os << "-";
        first = false;
        Q a = abs(c);
        if (a != 1) os << a.get_str() << "*";
        os << m.basis_name(i);
    }
    return os.str();
}

Vec parse_vec(const GModule& m, const std::string& s) {
    Vec v;
    auto t = text::trim(s);
    if (t == "0") return v;
    for (auto term : text::split_sum(t)) {
        Q coef(1);
        if (term[0] == '-') {
            coef = -1;
            term = text::trim(term.substr(1));
        }
        int idx = -1;
        for (const auto& f : text::split_product(term)) {
            int b = m.index_of(f);
            if (b >= 0) {
                if (idx >= 0) fail("ParseError", "two basis factors in '" + term + "'");
                idx = b;
            } else {
                coef *= parse_rational(f);
            }
        }
        if (idx < 0) {
            if (m.dim() == 1) idx = 0;
            else fail("ParseError", "no basis vector in '" + term + "'");
        }
        v.add(idx, coef);
    }
    return v;
}

}  // namespace vertexkit
