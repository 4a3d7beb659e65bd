// vertexkit: batch front end.  Exit status 0 when everything checked passes,
// 1 on a reported violation, 2 on bad usage or unreadable input.

#include "vertexkit/errors.hpp"
#include "vertexkit/family.hpp"
#include "vertexkit/multimaps.hpp"
#include "vertexkit/text.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace vertexkit;

namespace {

struct Usage : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Usage("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Library errors raised while reading a file carry its name.
template <class F>
auto load(const std::string& path, F parse) {
    std::string text = read_file(path);
    try {
        return parse(text);
    } catch (const Error& e) {
        throw Error(e.kind(), path + ": " + e.message());
    }
}

int threads_from_env() {
    const char* v = std::getenv("VERTEXKIT_THREADS");
    long n = 1;
    if (v && text::parse_int(v, n) && n > 0) return int(n);
    return 1;
}

struct Output {
    std::string path;
    std::ostringstream buf;
    void flush() {
        if (path.empty()) {
            std::cout << buf.str();
            return;
        }
        std::ofstream out(path);
        if (!out) throw Usage("cannot write " + path);
        out << buf.str();
    }
};

// "name=k"
std::pair<std::string, int> assignment(const std::string& s) {
    auto eq = s.find('=');
    long v;
    if (eq == std::string::npos || !text::parse_int(text::trim(s.substr(eq + 1)), v))
        throw Usage("expected NAME=INTEGER, got '" + s + "'");
    return {text::trim(s.substr(0, eq)), int(v)};
}

struct WindowFlags {
    std::optional<int> ceiling;
    std::vector<std::string> floors, diff_floors;

    void add_to(CLI::App* c) {
        c->add_option("--ceiling", ceiling, "total degree ceiling");
        c->add_option("--floor", floors, "support floor var=k")->take_all();
        c->add_option("--diff-floor", diff_floors, "pair floor x-y=k")->take_all();
    }
    void apply(LocalizedSeries& s) const {
        if (ceiling) s.set_ceiling(*ceiling);
        for (const auto& f : floors) {
            auto [v, k] = assignment(f);
            s.set_floor(v, k);
        }
        for (const auto& f : diff_floors) {
            auto [p, k] = assignment(f);
            auto dash = p.find('-');
            if (dash == std::string::npos) throw Usage("expected x-y=k, got '" + f + "'");
            s.set_diff_floor(text::trim(p.substr(0, dash)), text::trim(p.substr(dash + 1)), k);
        }
    }
};

struct ModelFlags {
    std::string file, model;
    int cutoff = 4;

    void add_to(CLI::App* c) {
        c->add_option("--vertex-algebra", file, "vertex algebra file");
        c->add_option("--model", model, "built-in model: freeboson or holomorphic")
            ->check(CLI::IsMember({"freeboson", "holomorphic"}));
        c->add_option("--weight-cutoff", cutoff, "cutoff of a built-in model");
    }
    bool given() const { return !file.empty() || !model.empty(); }
    VertexAlgebra get() const {
        if (!file.empty()) return load(file, [](const std::string& t) { return parse_vertex_algebra(t); });
        if (model == "freeboson") return free_boson(cutoff);
        if (model == "holomorphic") return from_comm_alg(polynomial_algebra(cutoff));
        throw Usage("give --vertex-algebra FILE or --model NAME");
    }
};

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    if (!out) throw Usage("cannot write " + p.string());
    out << text;
}

int report_status(const Report& r, std::ostream& os) {
    os << r.format();
    return r.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vertexkit: singular multilinear maps and vertex algebras"};
    app.require_subcommand(1);
    app.fallthrough();
    Output out;
    app.add_option("--out", out.path, "write the result here instead of stdout");

    // expand
    auto* expand = app.add_subcommand("expand", "expand difference poles or substitute variables");
    std::string in_text, subordinate, vars_list;
    std::vector<std::string> shifts;
    WindowFlags ewin;
    expand->add_option("--in", in_text, "series text")->required();
    expand->add_option("--vars", vars_list, "variable order, comma separated");
    expand->add_option("--subordinate", subordinate, "small variable of the expansion");
    expand->add_option("--shift", shifts, "substitution v=a+b")->take_all();
    expand->add_flag("--window", "print the window header too");
    ewin.add_to(expand);

    // act
    auto* act = app.add_subcommand("act", "apply a divided-power element to a series");
    std::string hopf_text, act_in;
    WindowFlags awin;
    act->add_option("--hopf", hopf_text, "e.g. 2*D(1) + D(3)")->required();
    act->add_option("--in", act_in, "series text")->required();
    awin.add_to(act);

    // compose / refine
    auto* comp = app.add_subcommand("compose", "plug one multimap into an input of another");
    std::string outer_file, inner_file;
    int slot = 1;
    comp->add_option("outer", outer_file, "outer multimap file")->required();
    comp->add_option("inner", inner_file, "inner multimap file")->required();
    comp->add_option("--slot", slot, "1-based input of the outer map")->required();

    auto* refine = app.add_subcommand("refine", "carry a multimap to a refined tree");
    std::string refine_file, refine_tree;
    refine->add_option("map", refine_file, "multimap file")->required();
    refine->add_option("--tree", refine_tree, "target tree, e.g. ((..).)")->required();

    // check
    auto* check = app.add_subcommand("check", "check a vertex algebra, a multimap or an algebra family");
    ModelFlags cmodel;
    cmodel.add_to(check);
    std::string check_map;
    int n_max = -1, max_leaves = 3, max_height = 2;
    check->add_option("--multimap", check_map, "multimap file");
    check->add_option("--n-max", n_max, "locality search bound (default twice the cutoff)");
    check->add_flag("--family", "run the algebra family check");
    check->add_option("--leaves", max_leaves, "family check: most leaves");
    check->add_option("--height", max_height, "family check: greatest height");

    // ope
    auto* ope = app.add_subcommand("ope", "three-leaf operator product with both ordering expansions");
    ModelFlags omodel;
    omodel.add_to(ope);
    int ope_n_max = -1;
    ope->add_option("--n-max", ope_n_max, "locality search bound");

    // trees
    auto* trees = app.add_subcommand("trees", "enumerate trees, linear extensions or refinements");
    int t_leaves = 3, t_height = 2;
    std::string ext_tree, ref_tree;
    trees->add_option("--leaves", t_leaves, "most leaves");
    trees->add_option("--height", t_height, "greatest height");
    trees->add_option("--linear-extensions", ext_tree, "list the orderings of this tree's vertices");
    trees->add_option("--refinements", ref_tree, "list enumerated trees this one refines to");

    // demo
    auto* demo = app.add_subcommand("demo", "free boson and holomorphic showcases");
    int demo_cutoff = 4;
    std::string demo_dir;
    demo->add_option("--weight-cutoff", demo_cutoff, "free boson cutoff");
    demo->add_option("--write", demo_dir, "directory for the sample files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    int status = 0;
    std::ostream& os = out.buf;
    try {
        if (*expand) {
            std::vector<std::string> vars;
            if (!vars_list.empty())
                for (const auto& v : text::split(vars_list, ',')) vars.push_back(text::trim(v));
            LocalizedSeries s = parse_series(in_text, GModule::scalars(), vars);
            ewin.apply(s);
            if (!shifts.empty()) {
                ShiftSpec spec;
                for (const auto& sh : shifts) {
                    auto eq = sh.find('=');
                    if (eq == std::string::npos) throw Usage("expected v=a+b, got '" + sh + "'");
                    std::vector<SignedVar> img;
                    for (const auto& piece : text::split_sum(sh.substr(eq + 1))) {
                        auto p = text::trim(piece);
                        if (p.empty()) continue;
                        if (p[0] == '-') img.push_back({text::trim(p.substr(1)), -1});
                        else img.push_back({p, 1});
                    }
                    spec.images[text::trim(sh.substr(0, eq))] = img;
                }
                if (!subordinate.empty() && ewin.ceiling) spec.bounds = {{{subordinate}, *ewin.ceiling}};
                s = shift_vars(s, spec);
            } else if (!subordinate.empty()) {
                if (s.var_index(subordinate) < 0) throw Usage(subordinate + " does not occur in the series");
                for (int p = 0; p < s.npairs(); ++p) {
                    auto [a, b] = s.pair_names(p);
                    if (a == subordinate || b == subordinate) s = expand_diff(s, a, b, subordinate);
                }
            }
            os << (expand->count("--window") ? format_series(s) : format_terms(s)) << "\n";
        } else if (*act) {
            LocalizedSeries s = parse_series(act_in);
            awin.apply(s);
            os << format_terms(hopf_act(parse_hopf(hopf_text), s)) << "\n";
        } else if (*comp) {
            auto g = load(outer_file, parse_multimap);
            auto f = load(inner_file, parse_multimap);
            os << format_multimap(compose(g, slot, f));
        } else if (*refine) {
            auto f = load(refine_file, parse_multimap);
            os << format_multimap(refine_map(f, tree_parse(refine_tree)));
        } else if (*check) {
            if (!check_map.empty()) {
                status = report_status(check_membership(load(check_map, parse_multimap)), os);
            } else {
                VertexAlgebra V = cmodel.get();
                const int bound = n_max >= 0 ? n_max : (V.weight_cutoff() ? 2 * *V.weight_cutoff() : 4);
                Report r = check_axioms(V);
                r.merge(check_quasisymmetry(V));
                auto order = locality_order(V, bound);
                r.record("locality", order.has_value(), "some pair needs more than N=" + std::to_string(bound));
                if (check->count("--family")) {
                    FamilyOptions fo;
                    fo.max_leaves = max_leaves;
                    fo.max_height = max_height;
                    if (n_max >= 0) fo.n_max = n_max;
                    fo.threads = threads_from_env();
                    r.merge(algebra_family_check(V, fo));
                }
                status = report_status(r, os);
                if (order) os << "locality order " << *order << "\n";
                const int gen = V.space().index_of("a1");
                if (gen >= 0 && order)
                    os << "generator pair locality N=" << check_locality(V, gen, gen, bound) << "\n";
                os << (status == 0 ? "all axioms pass\n" : "violations found\n");
            }
        } else if (*ope) {
            VertexAlgebra V = omodel.get();
            const int bound = ope_n_max >= 0 ? ope_n_max : (V.weight_cutoff() ? 2 * *V.weight_cutoff() : 4);
            SingularMultiMap f = build_ope(V, bound);
            os << format_multimap(f);
            const GModule& m = V.space();
            for (const auto& [t, s] : f.table) {
                auto at0 = specialize_zero(s, "x3");
                const int cap = at0.ceiling().value_or(bound);
                std::string name = m.basis_name(t[0]) + " " + m.basis_name(t[1]) + " " + m.basis_name(t[2]);
                os << "expand x1>x2 " << name << " | "
                   << format_terms(expand_diff(at0, "x1", "x2", "x2", cap)) << "\n";
                os << "expand x2>x1 " << name << " | "
                   << format_terms(expand_diff(at0, "x1", "x2", "x1", cap)) << "\n";
            }
        } else if (*trees) {
            if (!ext_tree.empty()) {
                auto ext = linear_extensions(tree_parse(ext_tree));
                for (const auto& e : ext) os << format_extension(e) << "\n";
                os << ext.size() << " orderings\n";
            } else if (!ref_tree.empty()) {
                Tree p = tree_parse(ref_tree);
                for (const auto& q : enumerate_trees(p.leaves(), std::max(t_height, p.height()), false))
                    if (q.leaves() == p.leaves() && is_refinement(p, q)) os << tree_format(q) << "\n";
            } else {
                auto all = enumerate_trees(t_leaves, t_height, true);
                for (const auto& t : all) os << tree_format(t) << "\n";
                os << all.size() << " trees\n";
            }
        } else if (*demo) {
            VertexAlgebra fb = free_boson(demo_cutoff);
            VertexAlgebra holo = from_comm_alg(polynomial_algebra(4));
            os << "free boson, weight cutoff " << demo_cutoff << ", dimension " << fb.dim() << "\n";
            Report r = check_axioms(fb);
            r.merge(check_quasisymmetry(fb));
            const int a = fb.space().index_of("a1");
            os << r.format();
            os << "Y(a1,x)a1 = " << format_terms(*fb.entry(a, a)) << "\n";
            os << "generator pair locality N=" << check_locality(fb, a, a, 2 * demo_cutoff) << "\n";
            SingularMultiMap f2 = from_vertex_operator(fb);
            SingularMultiMap left = compose(f2, 1, f2);
            Report m = check_membership(left);
            os << "composite on " << tree_format(left.tree) << ":\n" << m.format();
            os << "\nholomorphic Q[t], degree 4\n";
            Report h = check_axioms(holo);
            h.merge(check_comm_alg(to_comm_alg(holo)));
            os << h.format();
            os << "f(t (x) t) = " << format_terms(*from_vertex_operator(holo).entry({1, 1})) << "\n";
            status = r.ok() && m.ok() && h.ok() ? 0 : 1;
            if (!demo_dir.empty()) {
                std::filesystem::path dir(demo_dir);
                std::filesystem::create_directories(dir);
                write_file(dir / ("freeboson_w" + std::to_string(demo_cutoff) + ".va"), format_vertex_algebra(fb));
                write_file(dir / "holomorphic_t4.va", format_vertex_algebra(holo));
                write_file(dir / "freeboson_flat2.mm", format_multimap(f2));
                write_file(dir / "holomorphic_flat2.mm", format_multimap(from_vertex_operator(holo)));
                os << "wrote sample files to " << dir.string() << "\n";
            }
        }
        out.flush();
    } catch (const Usage& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return status;
}
