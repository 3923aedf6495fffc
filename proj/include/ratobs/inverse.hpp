#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "ratobs/groebner.hpp"
#include "ratobs/lie.hpp"

namespace ratobs {

// Rational (or polynomial) inverse of the chain map: r_i expresses state i
// in the tag variables T_1..T_k standing for s_1(x)..s_k(x). Side conditions
// are parameter polynomials that must stay nonzero for r to be valid.
struct InverseMap {
    enum class Method { Triangular, Groebner };
    std::vector<RationalFunction> r; // per state, over tags and parameters
    int m_used = 0;
    std::vector<Polynomial> side_conditions;
    SystemKind kind = SystemKind::Rational;
    Method method = Method::Triangular;
    // Groebner runs instantiate parameters; the witness values are recorded.
    std::vector<std::pair<std::string, BigRational>> param_instance;
};

// Tag variables for chain positions 1..count (created on first use).
std::vector<int> ensure_tags(const VarTablePtr &table, int count);

// Symbolic round trip r(s(x)) = x. The chain must be the one the inverse was
// computed against (parameter-instantiated chains included).
bool round_trip_holds(const InverseMap &inv, const SChain &chain);

struct TriangularFailure {
    int equation = 0; // 1-based index of the first unusable equation
    std::string degree_profile;
};

struct TriangularResult {
    std::optional<InverseMap> inverse;
    std::optional<TriangularFailure> failure;
};

// Scans the equations T_k = s_k(x) in order; any equation that is linear in
// exactly one still-unsolved state (after substituting solved ones) yields
// that state. The parameter factor of each coefficient solved against is
// recorded as a side condition, squarefree-reduced.
TriangularResult triangular_inverse(const SChain &chain);

struct GroebnerInverseResult {
    std::optional<InverseMap> inverse;
    std::string detail; // why not invertible at this order
};

// General route: saturated ideal of the denominator-cleared chain equations,
// lex elimination of the states (and the saturation variable), then a scan
// for basis elements linear in a single state over the tags. Parameters must
// be numerically bound, either in the system or through `param_values`.
GroebnerInverseResult groebner_inverse(const SChain &chain,
                                       const std::map<int, BigRational> &param_values,
                                       const GroebnerConfig &cfg = {});

struct ObservabilityOptions {
    int m_max = 0;        // 0 -> max(2n, n+2)
    std::uint64_t seed = 0;
    int groebner_trials = 3;
    GroebnerConfig groebner;
    int term_ceiling = kDefaultTermCeiling;
};

struct ObservabilityResult {
    std::optional<InverseMap> inverse;
    int m_o = 0;  // set when inverse is present
    int m_max_tried = 0;
    SChain chain; // at order m_o (or m_max on failure)
    std::vector<std::string> log;
};

// Least order m <= m_max at which the chain admits an inverse: the
// triangular route first, then the Groebner route at randomized admissible
// parameter values (majority of trials). Failure is only "not invertible up
// to m_max", never a proof of unobservability.
ObservabilityResult find_observability_index(const RationalSystem &sys,
                                             ObservabilityOptions opt = {});

int default_m_max(const RationalSystem &sys);

enum class JacobiVerdict { Holds, Fails, Indeterminate };

struct JacobiResult {
    JacobiVerdict verdict = JacobiVerdict::Indeterminate;
    RationalFunction det;
    std::optional<Polynomial> side_condition; // emitted when det is parameter-dependent
};

// det(Jacobian) of a square polynomial map must be a nonzero constant of the
// coefficient field. Parameter-only determinants hold conditionally and
// emit the nonzero requirement as a side condition. Throws NonPolynomialMap
// when an entry has a state-dependent denominator.
JacobiResult jacobi_condition(const std::vector<RationalFunction> &map,
                              const std::vector<int> &state_vars);

// Seeded draw of nonzero parameter values in [-10, 10] (steps of 1/10) that
// keep every assumption polynomial nonzero.
std::map<int, BigRational> random_admissible_parameters(const RationalSystem &sys,
                                                        std::uint64_t seed,
                                                        bool positive_only = false);

} // namespace ratobs
