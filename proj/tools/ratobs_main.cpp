#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ratobs/parser.hpp"
#include "ratobs/report.hpp"

using namespace ratobs;

namespace {

enum ExitCode { kOk = 0, kParse = 1, kNotObservable = 2, kResource = 3, kSimulation = 4, kOther = 10 };

int log_level() {
    const char *env = std::getenv("RATOBS_LOG");
    if (!env) return 0; // error only
    std::string s = env;
    if (s == "debug") return 2;
    if (s == "info") return 1;
    return 0;
}

void log_info(const std::string &msg) {
    if (log_level() >= 1) std::cerr << "[info] " << msg << "\n";
}

void log_debug(const std::string &msg) {
    if (log_level() >= 2) std::cerr << "[debug] " << msg << "\n";
}

std::string read_file(const std::string &path) {
    std::ifstream in(path);
    if (!in.good()) throw Error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

RationalSystem load_system(const std::string &path) {
    RationalSystem sys = parse_system(read_file(path));
    log_info("parsed system '" + sys.name + "' (n=" + std::to_string(sys.n()) +
             ", kind=" + (sys.kind == SystemKind::Polynomial ? "polynomial" : "rational") + ")");
    return sys;
}

void write_output(const std::string &text, const std::string &out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out.good()) throw Error("cannot write " + out_path);
    out << text;
}

std::vector<BigRational> parse_rational_list(const std::string &text) {
    std::vector<BigRational> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_rational(item));
    return out;
}

std::vector<std::complex<double>> parse_pole_list(const std::string &text) {
    // "a,b,c" real poles; "a+bi" / "a-bi" for complex pairs
    std::vector<std::complex<double>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t i_pos = item.find('i');
        if (i_pos == std::string::npos) {
            out.emplace_back(std::stod(item), 0.0);
            continue;
        }
        size_t split = item.find_last_of("+-", i_pos);
        if (split == std::string::npos || split == 0)
            throw Error("bad pole literal: " + item);
        double re = std::stod(item.substr(0, split));
        double im = std::stod(item.substr(split, i_pos - split));
        out.emplace_back(re, im);
    }
    return out;
}

struct CommonFlags {
    int m_max = 0;
    std::uint64_t seed = 0;
    double step = 1e-3;
    double horizon = 50.0;
    std::string out;
};

void add_common(CLI::App *cmd, CommonFlags &flags) {
    cmd->add_option("--max-order", flags.m_max, "highest chain order to try");
    cmd->add_option("--seed", flags.seed, "seed for all randomized steps");
    cmd->add_option("--step", flags.step, "integration step");
    cmd->add_option("--horizon", flags.horizon, "integration horizon");
    cmd->add_option("--out", flags.out, "write the report here instead of stdout");
}

int classify(const std::exception &e) {
    if (dynamic_cast<const SyntaxError *>(&e) || dynamic_cast<const UndefinedSymbol *>(&e) ||
        dynamic_cast<const DimensionMismatch *>(&e) ||
        dynamic_cast<const DenominatorZeroAtX0 *>(&e))
        return kParse;
    if (dynamic_cast<const NotObservableError *>(&e)) return kNotObservable;
    if (dynamic_cast<const ResourceExceeded *>(&e)) return kResource;
    return kOther;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"rational/polynomial observer synthesis"};
    app.require_subcommand(1);

    std::string file, report_path, csv_path, gain_text, poles_text, grid_text;
    CommonFlags flags;
    int lie_order = 3;

    auto *check = app.add_subcommand("check", "parse a system file and report diagnostics");
    check->add_option("file", file)->required();

    auto *lie = app.add_subcommand("lie", "print the chain of output derivatives");
    lie->add_option("file", file)->required();
    lie->add_option("-m,--max-order", lie_order, "chain order");
    lie->add_option("--out", flags.out);

    auto *obscmd = app.add_subcommand("observability", "find the observability index and inverse");
    obscmd->add_option("file", file)->required();
    add_common(obscmd, flags);

    auto *realize = app.add_subcommand("realize", "print the output-based realization");
    realize->add_option("file", file)->required();
    add_common(realize, flags);

    auto *synth = app.add_subcommand("synth", "synthesize an observer and emit the JSON report");
    synth->add_option("file", file)->required();
    add_common(synth, flags);
    synth->add_option("--gain", gain_text, "explicit gain entries k1,k2,...");
    synth->add_option("--poles", poles_text, "desired observer poles p1,p2,...");
    auto *grid_flag =
        synth->add_option("--grid", grid_text, "gain grid search, optionally as lo:hi:step")
            ->expected(0, 1);

    auto *simulate = app.add_subcommand("simulate", "integrate the performance system of a report");
    simulate->add_option("file", file)->required();
    simulate->add_option("report", report_path)->required();
    add_common(simulate, flags);
    simulate->add_option("--csv", csv_path, "trajectory CSV path (default stdout)");

    auto *paper = app.add_subcommand("paper-examples", "run the bundled worked examples");
    paper->add_option("--seed", flags.seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) {
            RationalSystem sys = load_system(file);
            std::cout << "ok: system '" << sys.name << "', n=" << sys.n()
                      << ", outputs=" << sys.m_y() << ", kind="
                      << (sys.kind == SystemKind::Polynomial ? "polynomial" : "rational")
                      << "\n";
            return kOk;
        }

        if (lie->parsed()) {
            RationalSystem sys = load_system(file);
            SChain chain = build_s_chain(sys, lie_order);
            std::ostringstream os;
            for (int k = 0; k < chain.length(); ++k)
                os << "s" << (k + 1) << " = " << chain.entries[k].str() << "\n";
            write_output(os.str(), flags.out);
            return kOk;
        }

        if (obscmd->parsed()) {
            RationalSystem sys = load_system(file);
            ObservabilityOptions opt;
            opt.m_max = flags.m_max;
            opt.seed = flags.seed;
            ObservabilityResult res = find_observability_index(sys, opt);
            if (!res.inverse) {
                std::cerr << "not invertible up to order " << res.m_max_tried << "\n";
                for (auto &line : res.log) std::cerr << "  " << line << "\n";
                return kNotObservable;
            }
            std::ostringstream os;
            os << "m_o = " << res.m_o << " (n_o = " << res.chain.length() << ")\n";
            os << "method = "
               << (res.inverse->method == InverseMap::Method::Triangular ? "triangular"
                                                                         : "groebner")
               << ", kind = "
               << (res.inverse->kind == SystemKind::Polynomial ? "polynomial" : "rational")
               << "\n";
            for (int i = 0; i < sys.n(); ++i)
                os << sys.table->name(sys.state_vars[i]) << " = " << res.inverse->r[i].str()
                   << "\n";
            for (auto &sc : res.inverse->side_conditions)
                os << "side condition: " << sc.str() << " != 0\n";
            if (sys.kind == SystemKind::Polynomial && res.chain.length() == sys.n()) {
                JacobiResult jac = jacobi_condition(res.chain.entries, sys.state_vars);
                os << "jacobi: "
                   << (jac.verdict == JacobiVerdict::Holds
                           ? "holds"
                           : jac.verdict == JacobiVerdict::Fails ? "fails" : "indeterminate")
                   << ", det = " << jac.det.str() << "\n";
                if (jac.side_condition)
                    os << "jacobi side condition: " << jac.side_condition->str() << " != 0\n";
            } else {
                os << "jacobi: not applicable\n";
            }
            write_output(os.str(), flags.out);
            return kOk;
        }

        if (realize->parsed()) {
            RationalSystem sys = load_system(file);
            ObservabilityOptions opt;
            opt.m_max = flags.m_max;
            opt.seed = flags.seed;
            ObservabilityResult res = find_observability_index(sys, opt);
            if (!res.inverse) {
                std::cerr << "not invertible up to order " << res.m_max_tried << "\n";
                return kNotObservable;
            }
            OutputRealization real = output_based_realization(sys, res.chain, *res.inverse);
            std::ostringstream os;
            for (int k = 0; k < real.n_o; ++k)
                os << "d xo" << (k + 1) << " = " << real.f_or[k].str() << "\n";
            for (int k = 0; k < real.n_o; ++k)
                os << "xo" << (k + 1) << "(0) = " << real.x_o0[k].str() << "\n";
            write_output(os.str(), flags.out);
            return kOk;
        }

        if (synth->parsed()) {
            RationalSystem sys = load_system(file);
            PipelineOptions opt;
            opt.m_max = flags.m_max;
            opt.seed = flags.seed;
            opt.sim.step = flags.step;
            opt.sim.horizon = flags.horizon;
            if (!gain_text.empty()) {
                opt.gain.mode = GainSpec::Mode::Explicit;
                std::vector<BigRational> entries = parse_rational_list(gain_text);
                for (auto &k : entries) opt.gain.explicit_gain.push_back({k});
            } else if (!poles_text.empty()) {
                opt.gain.mode = GainSpec::Mode::PolePlacement;
                opt.gain.poles = parse_pole_list(poles_text);
            } else if (*grid_flag || !grid_text.empty()) {
                opt.gain.mode = GainSpec::Mode::GridSearch;
                if (!grid_text.empty()) {
                    std::stringstream ss(grid_text);
                    std::string lo, hi, step;
                    std::getline(ss, lo, ':');
                    std::getline(ss, hi, ':');
                    std::getline(ss, step, ':');
                    opt.gain.grid_lo = parse_rational(lo);
                    opt.gain.grid_hi = parse_rational(hi);
                    opt.gain.grid_step = parse_rational(step);
                }
            } else {
                opt.gain.mode = GainSpec::Mode::PolePlacement; // default poles
            }
            PipelineResult result = run_pipeline(sys, opt);
            for (auto &lineItem : result.observability.log) log_debug(lineItem);
            for (auto &[stage, ms] : result.timings_ms)
                log_debug(stage + ": " + std::to_string(ms) + " ms");

            // human-readable observer alongside the machine report
            std::ostringstream text;
            text << "observer (m_o = " << result.observability.m_o << ", gain mode "
                 << result.gain_mode << "):\n";
            const Observer &obs = result.observer;
            for (int i = 0; i < obs.n_o; ++i)
                text << "  d xo" << (i + 1) << " = " << obs.f_o[i].str() << "\n";
            text << "  K =";
            for (auto &row : obs.K)
                for (auto &k : row) text << " " << to_string(k);
            text << "\n";
            std::cerr << text.str();

            Json report = report_to_json(result);
            write_output(report.dump(2) + "\n", flags.out);
            if (result.matched_run && !result.matched_run->completed()) return kSimulation;
            if (result.mismatched_run && !result.mismatched_run->completed())
                return kSimulation;
            return kOk;
        }

        if (simulate->parsed()) {
            RationalSystem sys = load_system(file);
            Json report = Json::parse(read_file(report_path));
            Observer obs = observer_from_report(sys, report);
            std::vector<double> base = base_point_from_report(sys, report);
            SimConfig cfg;
            cfg.step = flags.step;
            cfg.horizon = flags.horizon;
            SimResult run = performance_sim(sys, obs, cfg, base);
            std::ostringstream os;
            write_csv(os, run, sys.n(), obs.n_o, obs.m_y);
            write_output(os.str(), csv_path.empty() ? flags.out : csv_path);
            std::cerr << "status: " << to_string(run.status)
                      << ", tail_error: " << run.tail_error << "\n";
            return run.completed() ? kOk : kSimulation;
        }

        if (paper->parsed()) {
            auto rows = run_paper_examples(flags.seed);
            int passed = 0;
            for (auto &row : rows) {
                std::cout << (row.pass ? "[PASS] " : "[FAIL] ") << row.name << ": "
                          << row.detail << "\n";
                if (row.pass) ++passed;
            }
            std::cout << passed << "/" << rows.size() << " pipelines pass\n";
            return passed == static_cast<int>(rows.size()) ? kOk : kOther;
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify(e);
    }
    return kOther;
}
