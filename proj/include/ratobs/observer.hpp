#pragma once

#include <Eigen/Dense>
#include <complex>

#include "ratobs/realization.hpp"
#include "ratobs/sim_types.hpp"

namespace ratobs {

// Output-injected observer
//   dx_o/dt = A_o x_o + b_o(x_o) + [k_o(x_o) + K] (y - C_o x_o)
// with the nonlinear gain k_o zero outside the last output block, where it
// is the derivative of the drift with respect to the first block.
struct Observer {
    OutputRealization real;
    int n_o = 0, m_y = 0;
    std::vector<int> y_vars; // measured-output variables
    std::vector<std::vector<RationalFunction>> k_o; // n_o x m_y
    std::vector<std::vector<BigRational>> K;        // n_o x m_y
    std::vector<RationalFunction> f_o;              // dynamics over (xo, y)
};

Observer make_observer(const OutputRealization &real, std::vector<std::vector<BigRational>> K);

inline std::vector<std::vector<BigRational>> zero_gain(int n_o, int m_y) {
    return std::vector<std::vector<BigRational>>(n_o, std::vector<BigRational>(m_y, 0));
}

// Observer gain by characteristic-polynomial matching in the dual companion
// form (single output). The pole list must be closed under conjugation.
// Throws UnobservablePair when rank [C; CA; ...] < n.
Eigen::VectorXd pole_place(const Eigen::MatrixXd &A, const Eigen::RowVectorXd &C,
                           const std::vector<std::complex<double>> &poles);

struct GainSpec {
    enum class Mode { Explicit, PolePlacement, GridSearch };
    Mode mode = Mode::PolePlacement;
    std::vector<std::vector<BigRational>> explicit_gain;
    std::vector<std::complex<double>> poles;
    // grid search: the same 1-D range for every gain entry
    BigRational grid_lo = -4, grid_hi = 4, grid_step = 1;
    std::vector<std::vector<double>> observer_offsets; // added to s(x0) per run
};

struct GainSearchResult {
    std::vector<std::vector<BigRational>> K;
    double score = 0; // max over runs of the tail error
    long candidates_tried = 0;
};

// Evaluates every grid candidate by simulating the performance system from
// each mismatched start; candidates whose runs all stay finite compete on
// the worst tail error, ties broken by grid order. Parameters must be bound.
GainSearchResult gain_search(const RationalSystem &sys, const OutputRealization &real,
                             const GainSpec &spec, const SimConfig &cfg);

} // namespace ratobs
