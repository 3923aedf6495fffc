#pragma once

#include <json.hpp>

#include "ratobs/simulate.hpp"

namespace ratobs {

using Json = nlohmann::ordered_json;

struct PipelineOptions {
    int m_max = 0; // 0 -> default_m_max
    std::uint64_t seed = 0;
    GainSpec gain;
    SimConfig sim;
    bool run_simulation = true;
    GroebnerConfig groebner;
};

// Everything the synthesis produced, with per-stage wall times. Holds
// pointers into the system passed to run_pipeline; keep it alive.
struct PipelineResult {
    const RationalSystem *sys = nullptr;
    ObservabilityResult observability;
    bool jacobi_applicable = false;
    JacobiResult jacobi;
    OutputRealization realization;
    Observer observer;
    std::string gain_mode;
    std::optional<double> gain_score;
    std::vector<std::complex<double>> system_eigenvalues;   // linearization at x0
    std::vector<std::complex<double>> observer_eigenvalues; // closed loop at the start
    std::optional<SimResult> matched_run;
    std::optional<SimResult> mismatched_run;
    std::vector<double> mismatch_offsets;
    std::map<std::string, BigRational> param_instance; // drawn for unbound parameters
    std::map<std::string, double> timings_ms;
    std::uint64_t seed = 0;
};

// Steps 1-5 end to end. Throws on unrecoverable errors; an unobservable
// system is reported through `observability.inverse == nullopt` by
// run_observability_only, while run_pipeline throws NotObservableError.
struct NotObservableError : Error {
    int m_max;
    explicit NotObservableError(int m)
        : Error("not invertible up to order " + std::to_string(m)), m_max(m) {}
};

PipelineResult run_pipeline(const RationalSystem &sys, const PipelineOptions &opt);

Json report_to_json(const PipelineResult &result);

// Observer reconstruction for `simulate` runs driven by a stored report.
Observer observer_from_report(const RationalSystem &sys, const Json &report);

// Parameter values for numeric work: bound values plus the recorded
// instance for unbound ones.
std::vector<double> base_point_from_report(const RationalSystem &sys, const Json &report);

// The bundled example systems (also shipped under systems/).
const std::map<std::string, std::string> &bundled_systems();

struct PaperExampleRow {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Full synthesis pipelines for the four worked observer examples, with the
// internal verifications (round trips, gain derivative, matched-start run).
std::vector<PaperExampleRow> run_paper_examples(std::uint64_t seed);

} // namespace ratobs
