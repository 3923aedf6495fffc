#include "ratobs/inverse.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <sstream>

#include "ratobs/errors.hpp"

namespace ratobs {

namespace {

int ensure_named(const VarTablePtr &table, const std::string &base, VarRole role) {
    std::string name = base;
    for (int suffix = 0;; ++suffix) {
        if (suffix > 0) name = "_" + base + (suffix > 1 ? std::to_string(suffix) : "");
        int v = table->find(name);
        if (v < 0) return table->add(name, role);
        if (table->role(v) == role) return v;
    }
}

void record_side_condition(std::vector<Polynomial> &conditions, const Polynomial &coefficient) {
    Polynomial content = parameter_content(coefficient);
    if (content.is_constant()) return;
    Polynomial reduced = squarefree_part(content).integer_primitive();
    for (auto &existing : conditions)
        if (existing == reduced) return;
    conditions.push_back(reduced);
}

SystemKind inverse_kind(const std::vector<RationalFunction> &r) { return kind_of(r); }

} // namespace

std::vector<int> ensure_tags(const VarTablePtr &table, int count) {
    std::vector<int> tags;
    for (int k = 1; k <= count; ++k)
        tags.push_back(ensure_named(table, "T" + std::to_string(k), VarRole::Tag));
    return tags;
}

bool round_trip_holds(const InverseMap &inv, const SChain &chain) {
    const RationalSystem &sys = *chain.sys;
    std::vector<int> tags = ensure_tags(sys.table, chain.length());
    Bindings tag_to_s;
    for (int k = 0; k < chain.length(); ++k) tag_to_s[tags[k]] = chain.entries[k];
    for (int i = 0; i < sys.n(); ++i) {
        RationalFunction back = substitute(inv.r[i], tag_to_s);
        if (!eq(back, RationalFunction::variable(sys.table, sys.state_vars[i]))) return false;
    }
    return true;
}

TriangularResult triangular_inverse(const SChain &chain) {
    const RationalSystem &sys = *chain.sys;
    const VarTablePtr &table = sys.table;
    std::vector<int> tags = ensure_tags(table, chain.length());

    Bindings solved;
    std::vector<bool> done(sys.n(), false);
    std::vector<Polynomial> side_conditions;
    std::optional<TriangularFailure> first_skip;

    auto unsolved_states_in = [&](const Polynomial &p) {
        std::vector<int> out;
        for (int i = 0; i < sys.n(); ++i)
            if (!done[i] && p.degree_in(sys.state_vars[i]) > 0) out.push_back(i);
        return out;
    };

    for (int k = 0; k < chain.length(); ++k) {
        // denominator-cleared equation q_k T_k - p_k = 0
        Polynomial eqn = chain.entries[k].den() * Polynomial::variable(table, tags[k]) -
                         chain.entries[k].num();
        Polynomial current = substitute(eqn, solved).num();
        std::vector<int> open = unsolved_states_in(current);
        if (open.empty()) continue;
        int xi = open.size() == 1 ? sys.state_vars[open[0]] : -1;
        if (open.size() > 1 || current.degree_in(xi) != 1) {
            if (!first_skip) {
                std::ostringstream os;
                for (int i : open)
                    os << (os.tellp() > 0 ? ", " : "") << table->name(sys.state_vars[i])
                       << "^" << current.degree_in(sys.state_vars[i]);
                first_skip = TriangularFailure{k + 1, os.str()};
            }
            continue;
        }
        Polynomial coeff = current.coefficient_of(xi, 1);
        Polynomial rest = current.coefficient_of(xi, 0);
        solved[xi] = RationalFunction(-rest, coeff);
        done[open[0]] = true;
        record_side_condition(side_conditions, coeff);
    }

    if (std::all_of(done.begin(), done.end(), [](bool b) { return b; })) {
        InverseMap inv;
        inv.m_used = chain.order;
        inv.method = InverseMap::Method::Triangular;
        inv.side_conditions = std::move(side_conditions);
        for (int i = 0; i < sys.n(); ++i) inv.r.push_back(solved.at(sys.state_vars[i]));
        inv.kind = inverse_kind(inv.r);
        return {std::move(inv), std::nullopt};
    }
    if (!first_skip) {
        std::ostringstream os;
        for (int i = 0; i < sys.n(); ++i)
            if (!done[i]) os << (os.tellp() > 0 ? ", " : "") << table->name(sys.state_vars[i]);
        first_skip = TriangularFailure{chain.length(), "no equation left for " + os.str()};
    }
    return {std::nullopt, first_skip};
}

GroebnerInverseResult groebner_inverse(const SChain &chain,
                                       const std::map<int, BigRational> &param_values,
                                       const GroebnerConfig &cfg) {
    const RationalSystem &sys = *chain.sys;
    const VarTablePtr &table = sys.table;
    std::vector<int> tags = ensure_tags(table, chain.length());

    // bind every parameter: system-bound values first, then the given ones
    Bindings bind;
    std::vector<std::pair<std::string, BigRational>> instance;
    for (size_t i = 0; i < sys.param_vars.size(); ++i) {
        int v = sys.param_vars[i];
        std::optional<BigRational> val = sys.param_values[i];
        if (auto it = param_values.find(v); it != param_values.end()) val = it->second;
        if (val) {
            bind[v] = RationalFunction::constant(table, *val);
            instance.emplace_back(table->name(v), *val);
        }
    }

    std::vector<Polynomial> gens;
    Polynomial den_product = Polynomial::constant(table, 1);
    for (int k = 0; k < chain.length(); ++k) {
        RationalFunction s_k = substitute(chain.entries[k], bind);
        if (s_k.num().uses_role(VarRole::Parameter) || s_k.den().uses_role(VarRole::Parameter))
            throw Error("groebner_inverse needs numeric parameter values");
        gens.push_back(s_k.den() * Polynomial::variable(table, tags[k]) - s_k.num());
        if (!s_k.den().is_constant()) den_product = den_product * s_k.den();
    }
    int z = ensure_named(table, "Z", VarRole::Auxiliary);
    gens.push_back(Polynomial::constant(table, 1) -
                   Polynomial::variable(table, z) * den_product);

    std::vector<int> priority = sys.state_vars;
    priority.push_back(z);
    priority.insert(priority.end(), tags.begin(), tags.end());
    GroebnerBasis basis = buchberger(gens, MonomialOrder::lex(priority), cfg);

    auto linear_in_single_state = [&](const Polynomial &g, int state) -> bool {
        if (g.degree_in(state) != 1) return false;
        for (int v : g.variables()) {
            if (v == state) continue;
            VarRole role = table->role(v);
            if (role == VarRole::State || role == VarRole::Auxiliary) return false;
        }
        return true;
    };

    InverseMap inv;
    inv.m_used = chain.order;
    inv.method = InverseMap::Method::Groebner;
    inv.param_instance = std::move(instance);
    std::string missing;
    for (int i = 0; i < sys.n(); ++i) {
        int xi = sys.state_vars[i];
        const Polynomial *found = nullptr;
        for (const Polynomial &g : basis.generators)
            if (linear_in_single_state(g, xi)) {
                found = &g;
                break;
            }
        if (!found) {
            missing += (missing.empty() ? "" : ", ") + table->name(xi);
            continue;
        }
        Polynomial coeff = found->coefficient_of(xi, 1);
        Polynomial rest = found->coefficient_of(xi, 0);
        inv.r.push_back(RationalFunction(-rest, coeff));
    }
    if (!missing.empty())
        return {std::nullopt, "no basis element is linear in " + missing + " over the tags"};
    inv.kind = inverse_kind(inv.r);

    // the witness must invert the instantiated chain
    Bindings tag_to_s;
    for (int k = 0; k < chain.length(); ++k)
        tag_to_s[tags[k]] = substitute(chain.entries[k], bind);
    for (int i = 0; i < sys.n(); ++i)
        if (!eq(substitute(inv.r[i], tag_to_s),
                RationalFunction::variable(table, sys.state_vars[i])))
            throw Error("groebner inverse failed its round trip");
    return {std::move(inv), ""};
}

int default_m_max(const RationalSystem &sys) { return std::max(2 * sys.n(), sys.n() + 2); }

std::map<int, BigRational> random_admissible_parameters(const RationalSystem &sys,
                                                        std::uint64_t seed,
                                                        bool positive_only) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> num(positive_only ? 1 : -100, 100);
    std::vector<int> unbound;
    for (size_t i = 0; i < sys.param_vars.size(); ++i)
        if (!sys.param_values[i]) unbound.push_back(sys.param_vars[i]);

    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::map<int, BigRational> draw;
        bool zero = false;
        for (int v : unbound) {
            BigRational val(num(rng), 10);
            if (val == 0) zero = true;
            draw[v] = val;
        }
        if (zero) continue;

        // evaluate assumptions (parameter-only ones) at the draw
        std::vector<BigRational> point(sys.table->size(), 0);
        for (auto &[v, val] : draw) point[v] = val;
        for (size_t i = 0; i < sys.param_vars.size(); ++i)
            if (sys.param_values[i]) point[sys.param_vars[i]] = *sys.param_values[i];
        bool ok = true;
        for (const Polynomial &a : sys.assumptions) {
            bool param_only = true;
            for (int v : a.variables())
                if (sys.table->role(v) != VarRole::Parameter) param_only = false;
            if (param_only && a.eval(point) == 0) ok = false;
        }
        if (ok) return draw;
    }
    throw Error("could not draw admissible parameter values");
}

ObservabilityResult find_observability_index(const RationalSystem &sys,
                                             ObservabilityOptions opt) {
    ObservabilityResult result;
    int m_max = opt.m_max > 0 ? opt.m_max : default_m_max(sys);
    result.m_max_tried = m_max;

    SChain chain;
    for (int m = 1; m <= m_max; ++m) {
        chain = build_s_chain(sys, m, m > 1 ? &chain : nullptr, opt.term_ceiling);
        TriangularResult tri = triangular_inverse(chain);
        if (tri.inverse) {
            result.log.push_back("m=" + std::to_string(m) + ": triangular inverse");
            if (!round_trip_holds(*tri.inverse, chain))
                throw Error("triangular inverse failed its round trip");
            result.inverse = std::move(tri.inverse);
            result.m_o = m;
            result.chain = std::move(chain);
            return result;
        }
        std::string note = "m=" + std::to_string(m) + ": not triangular (equation " +
                           std::to_string(tri.failure->equation) + ", degrees " +
                           tri.failure->degree_profile + ")";

        if (sys.all_params_bound()) {
            GroebnerInverseResult g = groebner_inverse(chain, {}, opt.groebner);
            if (g.inverse) {
                result.log.push_back(note + "; groebner inverse");
                if (!round_trip_holds(*g.inverse, chain))
                    throw Error("groebner inverse failed its round trip");
                result.inverse = std::move(g.inverse);
                result.m_o = m;
                result.chain = std::move(chain);
                return result;
            }
            result.log.push_back(note + "; groebner: " + g.detail);
        } else {
            int successes = 0;
            std::optional<InverseMap> witness;
            for (int trial = 0; trial < opt.groebner_trials; ++trial) {
                auto params = random_admissible_parameters(
                    sys, opt.seed * 7919 + static_cast<std::uint64_t>(trial) + 1);
                GroebnerInverseResult g = groebner_inverse(chain, params, opt.groebner);
                if (g.inverse) {
                    ++successes;
                    if (!witness) witness = std::move(g.inverse);
                }
            }
            if (2 * successes > opt.groebner_trials) {
                result.log.push_back(note + "; groebner majority (" + std::to_string(successes) +
                                     "/" + std::to_string(opt.groebner_trials) + " trials)");
                result.inverse = std::move(witness);
                result.m_o = m;
                result.chain = std::move(chain);
                return result;
            }
            result.log.push_back(note + "; groebner trials: " + std::to_string(successes) + "/" +
                                 std::to_string(opt.groebner_trials));
        }
    }
    result.chain = std::move(chain);
    return result;
}

JacobiResult jacobi_condition(const std::vector<RationalFunction> &map,
                              const std::vector<int> &state_vars) {
    if (map.size() != state_vars.size()) throw DimensionMismatch("jacobi needs a square map");
    for (auto &g : map)
        if (!denominator_trivial(g)) throw NonPolynomialMap();

    const VarTablePtr &table = map.front().table();
    const int n = static_cast<int>(map.size());
    std::vector<std::vector<RationalFunction>> J(n, std::vector<RationalFunction>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) J[i][j] = partial(map[i], state_vars[j]);

    // cofactor expansion; n stays small here
    std::function<RationalFunction(std::vector<int>, std::vector<int>)> det =
        [&](std::vector<int> rows, std::vector<int> cols) -> RationalFunction {
        if (rows.size() == 1) return J[rows[0]][cols[0]];
        RationalFunction acc = RationalFunction::constant(table, 0);
        std::vector<int> subrows(rows.begin() + 1, rows.end());
        for (size_t c = 0; c < cols.size(); ++c) {
            if (J[rows[0]][cols[c]].is_zero()) continue;
            std::vector<int> subcols;
            for (size_t k = 0; k < cols.size(); ++k)
                if (k != c) subcols.push_back(cols[k]);
            RationalFunction minor = det(subrows, subcols);
            RationalFunction term = J[rows[0]][cols[c]] * minor;
            acc = (c % 2 == 0) ? acc + term : acc - term;
        }
        return acc;
    };
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    RationalFunction d = det(idx, idx);

    JacobiResult out;
    out.det = d;
    if (d.is_zero()) {
        out.verdict = JacobiVerdict::Fails;
        return out;
    }
    bool state_free = true;
    for (int v : d.num().variables())
        if (table->role(v) != VarRole::Parameter) state_free = false;
    if (!state_free) {
        out.verdict = JacobiVerdict::Fails;
        return out;
    }
    out.verdict = JacobiVerdict::Holds;
    if (!d.num().is_constant())
        out.side_condition = squarefree_part(parameter_content(d.num())).integer_primitive();
    return out;
}

} // namespace ratobs
