#include "ratobs/report.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "ratobs/parser.hpp"

namespace ratobs {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<double> numeric_base_point(const RationalSystem &sys,
                                       const std::map<std::string, BigRational> &instance) {
    std::vector<double> base(sys.table->size(), 0.0);
    for (size_t i = 0; i < sys.param_vars.size(); ++i)
        if (sys.param_values[i]) base[sys.param_vars[i]] = to_double(*sys.param_values[i]);
    for (auto &[name, value] : instance) {
        int v = sys.table->find(name);
        if (v >= 0) base[v] = to_double(value);
    }
    return base;
}

BigRational rational_from_double(double x, long denominator = 1l << 40) {
    if (!std::isfinite(x) || std::abs(x) > 4e6) throw Error("gain entry out of range");
    return BigRational(static_cast<long long>(std::llround(x * static_cast<double>(denominator))),
                       denominator);
}

Json complex_list(const std::vector<std::complex<double>> &values) {
    Json out = Json::array();
    for (auto &v : values) out.push_back(Json::array({v.real(), v.imag()}));
    return out;
}

Json sim_summary(const SimResult &run) {
    Json out;
    out["status"] = to_string(run.status);
    out["tail_error"] = run.tail_error;
    out["sup_error"] = run.sup_error;
    if (run.event_time >= 0) out["event_time"] = run.event_time;
    return out;
}

} // namespace

PipelineResult run_pipeline(const RationalSystem &sys, const PipelineOptions &opt) {
    PipelineResult result;
    result.sys = &sys;
    result.seed = opt.seed;

    auto t0 = Clock::now();
    ObservabilityOptions oopt;
    oopt.m_max = opt.m_max;
    oopt.seed = opt.seed;
    oopt.groebner = opt.groebner;
    result.observability = find_observability_index(sys, oopt);
    result.timings_ms["observability"] = ms_since(t0);
    if (!result.observability.inverse)
        throw NotObservableError(result.observability.m_max_tried);

    t0 = Clock::now();
    const SChain &chain = result.observability.chain;
    result.jacobi_applicable =
        sys.kind == SystemKind::Polynomial && chain.length() == sys.n();
    if (result.jacobi_applicable)
        result.jacobi = jacobi_condition(chain.entries, sys.state_vars);
    result.timings_ms["jacobi"] = ms_since(t0);

    t0 = Clock::now();
    result.realization =
        output_based_realization(sys, chain, *result.observability.inverse);
    result.timings_ms["realization"] = ms_since(t0);

    // unbound parameters get a seeded positive draw for the numeric stages
    if (!sys.all_params_bound()) {
        auto instance = random_admissible_parameters(sys, opt.seed + 1, /*positive_only=*/true);
        for (auto &[v, value] : instance) result.param_instance[sys.table->name(v)] = value;
    }
    std::vector<double> base = numeric_base_point(sys, result.param_instance);

    t0 = Clock::now();
    const OutputRealization &real = result.realization;
    std::vector<std::vector<BigRational>> K;
    switch (opt.gain.mode) {
    case GainSpec::Mode::Explicit:
        K = opt.gain.explicit_gain;
        result.gain_mode = "explicit";
        break;
    case GainSpec::Mode::GridSearch: {
        if (!sys.all_params_bound())
            throw Error("grid search needs bound parameters; bind them or use --gain");
        GainSearchResult found = gain_search(sys, real, opt.gain, opt.sim);
        K = found.K;
        result.gain_score = found.score;
        result.gain_mode = "grid";
        break;
    }
    case GainSpec::Mode::PolePlacement: {
        if (real.m_y != 1)
            throw Error("pole placement is single-output; use --grid or --gain");
        std::vector<double> point = base;
        std::vector<double> xo0 = initial_observer_state(real, base);
        for (int k = 0; k < real.n_o; ++k) point[real.xo_vars[k]] = xo0[k];
        Eigen::MatrixXd A = linearize(real.f_or, real.xo_vars, point);
        Eigen::RowVectorXd C = Eigen::RowVectorXd::Zero(real.n_o);
        C(0) = 1.0;
        std::vector<std::complex<double>> poles = opt.gain.poles;
        if (poles.empty()) {
            // 1.5x faster than the system linearization's slowest mode, spread out
            std::vector<double> x0pt = base;
            for (int i = 0; i < sys.n(); ++i) x0pt[sys.state_vars[i]] = to_double(sys.x0[i]);
            auto modes = eigenvalues(linearize(sys.f, sys.state_vars, x0pt));
            double slowest = -1e9;
            for (auto &l : modes) slowest = std::max(slowest, l.real());
            double rate = 1.5 * std::max(1.0, std::abs(slowest));
            for (int k = 0; k < real.n_o; ++k)
                poles.emplace_back(-rate * (1.0 + 0.25 * k), 0.0);
        }
        Eigen::VectorXd Kvec = pole_place(A, C, poles);
        K = zero_gain(real.n_o, 1);
        for (int k = 0; k < real.n_o; ++k) K[k][0] = rational_from_double(Kvec(k));
        result.gain_mode = "poles";
        break;
    }
    }
    result.observer = make_observer(real, std::move(K));
    result.timings_ms["observer"] = ms_since(t0);
    base.resize(sys.table->size(), 0.0); // the observer stage added variables

    t0 = Clock::now();
    {
        std::vector<double> x0pt = base;
        for (int i = 0; i < sys.n(); ++i) x0pt[sys.state_vars[i]] = to_double(sys.x0[i]);
        result.system_eigenvalues = eigenvalues(linearize(sys.f, sys.state_vars, x0pt));

        std::vector<double> xo0 = initial_observer_state(real, base);
        std::vector<double> point = base;
        for (int k = 0; k < real.n_o; ++k) point[real.xo_vars[k]] = xo0[k];
        for (int j = 0; j < real.m_y; ++j) {
            // feed the matched output
            double den = sys.h[j].den().eval_double(x0pt);
            point[result.observer.y_vars[j]] = sys.h[j].num().eval_double(x0pt) / den;
        }
        result.observer_eigenvalues =
            eigenvalues(linearize(result.observer.f_o, real.xo_vars, point));
    }
    result.timings_ms["stability"] = ms_since(t0);

    if (opt.run_simulation) {
        t0 = Clock::now();
        SimConfig cfg = opt.sim;
        cfg.store_trajectory = false;
        result.matched_run = performance_sim(sys, result.observer, cfg, base);

        std::vector<double> offsets = opt.gain.observer_offsets.empty()
                                          ? std::vector<double>()
                                          : opt.gain.observer_offsets.front();
        if (offsets.empty())
            for (int k = 0; k < real.n_o; ++k) offsets.push_back(k % 2 == 0 ? 0.5 : -0.5);
        result.mismatch_offsets = offsets;
        std::vector<double> start = initial_observer_state(real, base);
        for (int k = 0; k < real.n_o; ++k) start[k] += offsets[k];
        result.mismatched_run = performance_sim(sys, result.observer, cfg, base, start);
        result.timings_ms["simulation"] = ms_since(t0);
    }
    return result;
}

Json report_to_json(const PipelineResult &result) {
    const RationalSystem &sys = *result.sys;
    Json report;

    Json system;
    system["name"] = sys.name;
    system["kind"] = sys.kind == SystemKind::Polynomial ? "polynomial" : "rational";
    system["n"] = sys.n();
    system["m_y"] = sys.m_y();
    Json states = Json::array();
    for (int v : sys.state_vars) states.push_back(sys.table->name(v));
    system["states"] = states;
    Json params = Json::object();
    for (size_t i = 0; i < sys.param_vars.size(); ++i) {
        const std::string &name = sys.table->name(sys.param_vars[i]);
        params[name] = sys.param_values[i] ? Json(to_string(*sys.param_values[i])) : Json();
    }
    system["params"] = params;
    Json x0 = Json::array();
    for (auto &v : sys.x0) x0.push_back(to_string(v));
    system["x0"] = x0;
    Json f = Json::array();
    for (auto &g : sys.f) f.push_back(g.str());
    system["f"] = f;
    Json h = Json::array();
    for (auto &g : sys.h) h.push_back(g.str());
    system["h"] = h;
    Json assumptions = Json::array();
    for (auto &a : sys.assumptions) assumptions.push_back(a.str());
    system["assumptions"] = assumptions;
    if (!result.param_instance.empty()) {
        Json inst = Json::object();
        for (auto &[name, value] : result.param_instance) inst[name] = to_string(value);
        system["param_instance"] = inst;
    }
    report["system"] = system;

    const SChain &chain = result.observability.chain;
    Json chain_json;
    chain_json["m_o"] = result.observability.m_o;
    chain_json["n_o"] = chain.length();
    Json entries = Json::array();
    for (auto &e : chain.entries) entries.push_back(e.str());
    chain_json["entries"] = entries;
    Json log = Json::array();
    for (auto &line : result.observability.log) log.push_back(line);
    chain_json["search_log"] = log;
    report["chain"] = chain_json;

    const InverseMap &inv = *result.observability.inverse;
    Json inverse;
    inverse["method"] = inv.method == InverseMap::Method::Triangular ? "triangular" : "groebner";
    inverse["kind"] = inv.kind == SystemKind::Polynomial ? "polynomial" : "rational";
    inverse["m_used"] = inv.m_used;
    Json r = Json::array();
    for (auto &ri : inv.r) r.push_back(ri.str());
    inverse["r"] = r;
    Json side = Json::array();
    for (auto &sc : inv.side_conditions) side.push_back(sc.str());
    inverse["side_conditions"] = side;
    if (!inv.param_instance.empty()) {
        Json inst = Json::object();
        for (auto &[name, value] : inv.param_instance) inst[name] = to_string(value);
        inverse["param_instance"] = inst;
    }
    report["inverse"] = inverse;

    Json jacobi;
    if (!result.jacobi_applicable) {
        jacobi["verdict"] = "not_applicable";
    } else {
        switch (result.jacobi.verdict) {
        case JacobiVerdict::Holds: jacobi["verdict"] = "holds"; break;
        case JacobiVerdict::Fails: jacobi["verdict"] = "fails"; break;
        case JacobiVerdict::Indeterminate: jacobi["verdict"] = "indeterminate"; break;
        }
        jacobi["det"] = result.jacobi.det.str();
        if (result.jacobi.side_condition)
            jacobi["side_condition"] = result.jacobi.side_condition->str();
    }
    report["jacobi"] = jacobi;

    const OutputRealization &real = result.realization;
    Json realization;
    realization["n_o"] = real.n_o;
    realization["kind"] = real.kind == SystemKind::Polynomial ? "polynomial" : "rational";
    Json f_or = Json::array();
    for (auto &g : real.f_or) f_or.push_back(g.str());
    realization["f_or"] = f_or;
    Json b_o = Json::array();
    for (auto &g : real.b_o) b_o.push_back(g.str());
    realization["b_o"] = b_o;
    Json x_o0 = Json::array();
    for (auto &g : real.x_o0) x_o0.push_back(g.str());
    realization["x_o0"] = x_o0;
    report["realization"] = realization;

    const Observer &obs = result.observer;
    Json observer;
    observer["gain_mode"] = result.gain_mode;
    Json K = Json::array();
    for (auto &row : obs.K) {
        Json jrow = Json::array();
        for (auto &k : row) jrow.push_back(to_string(k));
        K.push_back(jrow);
    }
    observer["K"] = K;
    Json k_o = Json::array();
    for (auto &row : obs.k_o) {
        Json jrow = Json::array();
        for (auto &g : row) jrow.push_back(g.str());
        k_o.push_back(jrow);
    }
    observer["k_o"] = k_o;
    if (result.gain_score) observer["score"] = *result.gain_score;
    report["observer"] = observer;

    Json stability;
    stability["system_eigenvalues_at_x0"] = complex_list(result.system_eigenvalues);
    stability["observer_eigenvalues_at_start"] = complex_list(result.observer_eigenvalues);
    report["stability"] = stability;

    Json simulation;
    if (result.matched_run) {
        simulation["matched"] = sim_summary(*result.matched_run);
        Json mism = sim_summary(*result.mismatched_run);
        Json offs = Json::array();
        for (double o : result.mismatch_offsets) offs.push_back(o);
        mism["offsets"] = offs;
        simulation["mismatched"] = mism;
    } else {
        simulation["skipped"] = "simulation disabled";
    }
    report["simulation"] = simulation;

    Json timings;
    for (auto &[stage, ms] : result.timings_ms) timings[stage] = ms;
    report["timings"] = timings;
    report["seed"] = result.seed;
    return report;
}

Observer observer_from_report(const RationalSystem &sys, const Json &report) {
    OutputRealization real;
    real.sys = &sys;
    real.n_o = report.at("realization").at("n_o").get<int>();
    real.m_y = sys.m_y();

    // chain and inverse, re-parsed over the system's table
    real.chain.sys = &sys;
    real.chain.order = report.at("chain").at("m_o").get<int>();
    std::vector<int> tags = ensure_tags(sys.table, real.n_o);
    for (auto &entry : report.at("chain").at("entries"))
        real.chain.entries.push_back(parse_expression(entry.get<std::string>(), sys.table));

    InverseMap inv;
    inv.m_used = report.at("inverse").at("m_used").get<int>();
    inv.method = report.at("inverse").at("method") == "triangular"
                     ? InverseMap::Method::Triangular
                     : InverseMap::Method::Groebner;
    inv.kind = report.at("inverse").at("kind") == "polynomial" ? SystemKind::Polynomial
                                                               : SystemKind::Rational;
    for (auto &entry : report.at("inverse").at("r"))
        inv.r.push_back(parse_expression(entry.get<std::string>(), sys.table));
    real.inverse = std::move(inv);

    for (int i = 1; i <= real.n_o; ++i) {
        int v = sys.table->find("xo" + std::to_string(i));
        real.xo_vars.push_back(v >= 0 ? v : sys.table->add("xo" + std::to_string(i),
                                                           VarRole::Auxiliary));
    }
    for (auto &entry : report.at("realization").at("f_or"))
        real.f_or.push_back(parse_expression(entry.get<std::string>(), sys.table));
    for (auto &entry : report.at("realization").at("b_o"))
        real.b_o.push_back(parse_expression(entry.get<std::string>(), sys.table));
    for (auto &entry : report.at("realization").at("x_o0"))
        real.x_o0.push_back(parse_expression(entry.get<std::string>(), sys.table));
    real.kind = report.at("realization").at("kind") == "polynomial" ? SystemKind::Polynomial
                                                                    : SystemKind::Rational;

    std::vector<std::vector<BigRational>> K;
    for (auto &row : report.at("observer").at("K")) {
        std::vector<BigRational> krow;
        for (auto &k : row) krow.push_back(parse_rational(k.get<std::string>()));
        K.push_back(krow);
    }
    return make_observer(real, std::move(K));
}

std::vector<double> base_point_from_report(const RationalSystem &sys, const Json &report) {
    std::map<std::string, BigRational> instance;
    if (report.at("system").contains("param_instance"))
        for (auto &[name, value] : report.at("system").at("param_instance").items())
            instance[name] = parse_rational(value.get<std::string>());
    return numeric_base_point(sys, instance);
}

const std::map<std::string, std::string> &bundled_systems() {
    static const std::map<std::string, std::string> sources = {
        {"michaelis", R"(system michaelis {
  params a = 1 b = 1 c = 1 d = 2 e = 1;
  states x1 = 1 x2 = 1;
  d x1 = -a*x1 + (c*x1 + b*x1^2) / (x1 + d);
  d x2 = e*x1 / (x1 + d);
  output y = x2;
}
)"},
        {"polsys", R"(system polsys {
  params a11 a12 a22;
  states x1 = 1 x2 = 1/2;
  d x1 = -a11*x1^3 + a12*x2;
  d x2 = -a22*x2;
  output y = x1;
  assume a11 != 0;
  assume a12 != 0;
  assume a22 != 0;
}
)"},
        {"higher", R"(system higher {
  params a12 a13 a14 a21 a22;
  states x1 = 1 x2 = 1;
  d x1 = 2*a21*x1 - a12*(x2 - a13)*(x2 - a14);
  d x2 = -a21*x2 + a22;
  output y = x1;
  assume a12 != 0;
  assume a21 != 0;
  assume a21*(a13 + a14) - 2*a22 != 0;
}
)"},
        {"ratsys", R"(system ratsys {
  params a11 a12 a13 a14 a21 a22 a23;
  states x1 = 1 x2 = 1;
  d x1 = -a11*x1 / (1 + a12*x1) + a13*x2 / (1 + a14*x2);
  d x2 = -a21*x2 / (1 + a22*x2) + a23;
  output y = x1;
  assume a13 != 0;
}
)"},
        {"twocomp", R"(system twocomp {
  params a1 a2 a3 a4;
  states x1 = 1 x2 = 1;
  d x1 = a1 - a2*x1*x2 / (1 + a3*x2^2);
  d x2 = a2*x1*x2 / (1 + a3*x2^2) - a4*x2;
  output y = x2;
  assume a2 != 0;
}
)"},
    };
    return sources;
}

std::vector<PaperExampleRow> run_paper_examples(std::uint64_t seed) {
    std::vector<PaperExampleRow> rows;
    const std::vector<std::pair<std::string, double>> cases = {
        {"polsys", 20.0}, {"higher", 1.0}, {"ratsys", 20.0}, {"twocomp", 20.0}};

    for (auto &[name, horizon] : cases) {
        PaperExampleRow row;
        row.name = name;
        try {
            RationalSystem sys = parse_system(bundled_systems().at(name));
            ObservabilityOptions oopt;
            oopt.seed = seed;
            ObservabilityResult res = find_observability_index(sys, oopt);
            if (!res.inverse) {
                row.detail = "not invertible up to m_max";
                rows.push_back(row);
                continue;
            }
            if (!round_trip_holds(*res.inverse, res.chain)) {
                row.detail = "symbolic round trip failed";
                rows.push_back(row);
                continue;
            }
            OutputRealization real = output_based_realization(sys, res.chain, *res.inverse);
            Observer obs = make_observer(real, zero_gain(real.n_o, real.m_y));

            // forward trip at random rational points, exact
            std::mt19937_64 rng(seed * 31 + 7);
            std::vector<int> tags = ensure_tags(sys.table, res.chain.length());
            int points = 0;
            for (int attempt = 0; attempt < 4000 && points < 25; ++attempt) {
                std::vector<BigRational> point(sys.table->size(), 0);
                for (int v = 0; v < sys.table->size(); ++v)
                    point[v] = BigRational(static_cast<int>(rng() % 21) - 10,
                                           1 + static_cast<int>(rng() % 4));
                for (auto &[pname, pvalue] : res.inverse->param_instance)
                    point[sys.table->find(pname)] = pvalue;
                bool ok = true;
                for (auto &a : sys.assumptions)
                    if (a.eval(point) == 0) ok = false;
                for (auto &sc : res.inverse->side_conditions)
                    if (sc.eval(point) == 0) ok = false;
                for (int k = 0; ok && k < res.chain.length(); ++k) {
                    auto val = eval_rational(res.chain.entries[k], point);
                    if (!val)
                        ok = false;
                    else
                        point[tags[k]] = *val;
                }
                if (!ok) continue;
                bool defined = true;
                for (int i = 0; i < sys.n() && defined; ++i) {
                    auto back = eval_rational(res.inverse->r[i], point);
                    if (!back)
                        defined = false;
                    else if (*back != point[sys.state_vars[i]])
                        throw Error("numeric round trip failed");
                }
                if (defined) ++points;
            }
            if (points < 25) throw Error("too few admissible points");

            // gain derivative against finite differences
            std::map<std::string, BigRational> instance;
            if (!sys.all_params_bound())
                for (auto &[v, value] :
                     random_admissible_parameters(sys, seed + 1, /*positive_only=*/true))
                    instance[sys.table->name(v)] = value;
            std::vector<double> base = numeric_base_point(sys, instance);
            const RationalFunction &b_last = real.b_o[real.m_y - 1];
            const RationalFunction &k_last = obs.k_o[real.n_o - 1][0];
            std::uniform_real_distribution<double> coord(-1.5, 1.5);
            int checked = 0;
            for (int attempt = 0; attempt < 4000 && checked < 25; ++attempt) {
                std::vector<double> pt = base;
                for (int v : real.xo_vars) pt[v] = coord(rng);
                auto den_ok = [&](const RationalFunction &g) {
                    return std::abs(g.den().eval_double(pt)) > 0.3;
                };
                if (!den_ok(b_last) || !den_ok(k_last)) continue;
                const double h = 1e-4;
                auto val = [&](double offset) {
                    auto at = pt;
                    at[real.xo_vars[0]] += offset;
                    return b_last.num().eval_double(at) / b_last.den().eval_double(at);
                };
                double d1 = (val(h) - val(-h)) / (2 * h);
                double d2 = (val(h / 2) - val(-h / 2)) / h;
                double fd = (4 * d2 - d1) / 3;
                double sym = k_last.num().eval_double(pt) / k_last.den().eval_double(pt);
                if (std::abs(fd - sym) / std::max(1.0, std::abs(sym)) > 1e-6)
                    throw Error("gain does not match finite differences of the drift");
                ++checked;
            }
            if (checked < 25) throw Error("too few gain-check points");

            // matched start: the error output stays at integration noise
            SimConfig cfg;
            cfg.horizon = horizon;
            cfg.store_trajectory = false;
            SimResult run = performance_sim(sys, obs, cfg, base);
            if (run.sup_error > 1e-6)
                throw Error("matched-start error " + std::to_string(run.sup_error));

            row.pass = true;
            row.detail = "m_o=" + std::to_string(res.m_o) +
                         ", matched-start sup|e_y|=" + std::to_string(run.sup_error);
        } catch (const std::exception &e) {
            row.detail = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace ratobs
