#pragma once

#include <iosfwd>
#include <optional>

#include "ratobs/observer.hpp"

namespace ratobs {

// Rational function flattened for fast float evaluation against a dense
// point vector indexed by table variable.
struct CompiledPoly {
    struct Term {
        double c;
        std::vector<std::pair<int, int>> pows;
    };
    std::vector<Term> terms;
    double eval(const std::vector<double> &point) const;
};

struct CompiledRational {
    CompiledPoly num, den;
};

CompiledRational compile(const RationalFunction &g);

// Explicit ODE over a subset of table slots. `defines` are evaluated into
// the point before the right-hand sides (the observer's measured output).
struct FieldSpec {
    std::vector<double> base_point;        // parameter values and other constants
    std::vector<int> slots;                // integrated coordinates
    std::vector<CompiledRational> rhs;     // one per slot
    std::vector<std::pair<int, CompiledRational>> defines;
    std::vector<CompiledRational> outputs; // error outputs e_y
    std::vector<int> orthant_slots;        // guarded when cfg.positive_orthant_guard
    // linear correction: rhs[i] += sum_j K[i][j] * (point[y_j] - point[xo_j])
    std::vector<std::vector<double>> gain; // optional, n_rhs x m
    std::vector<std::pair<int, int>> gain_diffs; // (y slot, xo slot) per column
};

// Classic fixed-step fourth-order Runge-Kutta on the exact field compiled to
// doubles. Poles (any |den| < eps_den) and non-finite states abort with the
// corresponding status; completed runs are Converged when the tail error
// stays under cfg.converged_tol.
SimResult integrate(const FieldSpec &field, const std::vector<double> &init,
                    const SimConfig &cfg);

// Stacked (x, x_o) dynamics with e_y = h(x) - C_o x_o recorded per sample.
// The observer starts at x_o0 when given, else at s(x0) (matched start).
// base_point must carry values for every unbound parameter.
SimResult performance_sim(const RationalSystem &sys, const Observer &obs, const SimConfig &cfg,
                          const std::vector<double> &base_point,
                          std::optional<std::vector<double>> x_o0 = std::nullopt,
                          std::optional<std::vector<double>> x0 = std::nullopt);

FieldSpec performance_field(const RationalSystem &sys, const Observer &obs,
                            const std::vector<double> &base_point);

// The system alone, no observer attached and no error output.
FieldSpec system_field(const RationalSystem &sys, const std::vector<double> &base_point);

// Jacobian of the field with respect to `wrt`, evaluated at the point.
Eigen::MatrixXd linearize(const std::vector<RationalFunction> &field,
                          const std::vector<int> &wrt, const std::vector<double> &point,
                          double eps_den = 1e-9);

// Dense nonsymmetric eigenvalues (n <= 12) with a determinant residual check.
std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd &M);

// Rank of [C; CA; ...; CA^{n-1}] with threshold n * sigma_max * 1e-12.
int observability_rank(const Eigen::MatrixXd &A, const Eigen::MatrixXd &C);

// Header "t,x_1..,xo_1..,ey_1.." with one decimal-float row per sample.
void write_csv(std::ostream &os, const SimResult &result, int n, int n_o, int m_y);

} // namespace ratobs
