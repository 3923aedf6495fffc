#include "ratobs/observer.hpp"

#include <cmath>

#include "ratobs/errors.hpp"
#include "ratobs/simulate.hpp"

namespace ratobs {

namespace {

std::vector<int> ensure_measurement_vars(const VarTablePtr &table, int m_y) {
    std::vector<int> out;
    for (int j = 1; j <= m_y; ++j) {
        std::string name = "y" + std::to_string(j);
        int v = table->find(name);
        if (v >= 0 && table->role(v) == VarRole::Auxiliary) {
            out.push_back(v);
        } else if (v < 0) {
            out.push_back(table->add(name, VarRole::Auxiliary));
        } else {
            out.push_back(table->add("_" + name, VarRole::Auxiliary));
        }
    }
    return out;
}

} // namespace

Observer make_observer(const OutputRealization &real, std::vector<std::vector<BigRational>> K) {
    const RationalSystem &sys = *real.sys;
    Observer obs;
    obs.real = real;
    obs.n_o = real.n_o;
    obs.m_y = real.m_y;
    obs.y_vars = ensure_measurement_vars(sys.table, real.m_y);
    if (static_cast<int>(K.size()) != real.n_o)
        throw DimensionMismatch("gain has " + std::to_string(K.size()) + " rows, need " +
                                std::to_string(real.n_o));
    for (auto &row : K)
        if (static_cast<int>(row.size()) != real.m_y)
            throw DimensionMismatch("gain row width");
    obs.K = std::move(K);

    // k_o vanishes outside the last output block; there it is the drift's
    // sensitivity to the injected block
    obs.k_o.assign(real.n_o, std::vector<RationalFunction>(
                                 real.m_y, RationalFunction::constant(sys.table, 0)));
    for (int j = 0; j < real.m_y; ++j)
        for (int l = 0; l < real.m_y; ++l)
            obs.k_o[real.n_o - real.m_y + j][l] = partial(real.b_o[j], real.xo_vars[l]);

    for (int i = 0; i < real.n_o; ++i) {
        RationalFunction acc = real.f_or[i];
        for (int j = 0; j < real.m_y; ++j) {
            RationalFunction gain =
                obs.k_o[i][j] + RationalFunction::constant(sys.table, obs.K[i][j]);
            if (gain.is_zero()) continue;
            RationalFunction diff = RationalFunction::variable(sys.table, obs.y_vars[j]) -
                                    RationalFunction::variable(sys.table, real.xo_vars[j]);
            acc = acc + gain * diff;
        }
        obs.f_o.push_back(acc);
    }

    // injecting the observer's own output must reproduce the realization
    Bindings y_to_xo;
    for (int j = 0; j < real.m_y; ++j)
        y_to_xo[obs.y_vars[j]] = RationalFunction::variable(sys.table, real.xo_vars[j]);
    for (int i = 0; i < real.n_o; ++i)
        if (!eq(substitute(obs.f_o[i], y_to_xo), real.f_or[i]))
            throw Error("output injection does not collapse at zero error");
    return obs;
}

Eigen::VectorXd pole_place(const Eigen::MatrixXd &A, const Eigen::RowVectorXd &C,
                           const std::vector<std::complex<double>> &poles) {
    const int n = static_cast<int>(A.rows());
    if (A.cols() != n || C.cols() != n) throw DimensionMismatch("pole_place shapes");
    if (static_cast<int>(poles.size()) != n)
        throw DimensionMismatch("need exactly n poles");

    // conjugation closure, so the characteristic polynomial is real
    std::vector<bool> used(poles.size(), false);
    for (size_t i = 0; i < poles.size(); ++i) {
        if (used[i] || std::abs(poles[i].imag()) < 1e-12) continue;
        bool matched = false;
        for (size_t j = 0; j < poles.size(); ++j) {
            if (j == i || used[j]) continue;
            if (std::abs(poles[j] - std::conj(poles[i])) < 1e-9) {
                used[i] = used[j] = true;
                matched = true;
                break;
            }
        }
        if (!matched) throw Error("pole list is not closed under conjugation");
    }

    if (observability_rank(A, C) < n) throw UnobservablePair();

    // desired characteristic polynomial, expanded over the reals
    std::vector<std::complex<double>> coeffs{1.0};
    for (auto p : poles) {
        coeffs.push_back(0.0);
        for (size_t k = coeffs.size() - 1; k > 0; --k) coeffs[k] = coeffs[k] - p * coeffs[k - 1];
    }

    // dual companion route: K = p(A) * O^{-1} * e_n
    Eigen::MatrixXd O(n, n);
    Eigen::RowVectorXd row = C;
    for (int k = 0; k < n; ++k) {
        O.row(k) = row;
        row = row * A;
    }
    Eigen::MatrixXd pA = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
    for (int k = static_cast<int>(coeffs.size()) - 1; k >= 0; --k) {
        pA += coeffs[k].real() * power;
        if (k > 0) power = power * A;
    }
    Eigen::VectorXd e_n = Eigen::VectorXd::Zero(n);
    e_n(n - 1) = 1.0;
    return pA * O.fullPivLu().solve(e_n);
}

GainSearchResult gain_search(const RationalSystem &sys, const OutputRealization &real,
                             const GainSpec &spec, const SimConfig &cfg) {
    if (spec.grid_step <= 0) throw Error("grid step must be positive");
    std::vector<BigRational> ticks;
    for (BigRational v = spec.grid_lo; v <= spec.grid_hi; v += spec.grid_step)
        ticks.push_back(v);
    if (ticks.empty()) throw NoStableCandidate();

    const int entries = real.n_o * real.m_y;
    double total = std::pow(static_cast<double>(ticks.size()), entries);
    if (total > 2e5) throw ResourceExceeded("gain grid has " + std::to_string(total) + " points");

    Observer obs = make_observer(real, zero_gain(real.n_o, real.m_y));
    std::vector<double> base_point(sys.table->size(), 0.0);
    for (size_t i = 0; i < sys.param_vars.size(); ++i) {
        if (!sys.param_values[i]) throw Error("gain search needs bound parameters");
        base_point[sys.param_vars[i]] = to_double(*sys.param_values[i]);
    }
    FieldSpec field = performance_field(sys, obs, base_point);

    std::vector<std::vector<double>> offsets = spec.observer_offsets;
    if (offsets.empty()) {
        std::vector<double> alt(real.n_o);
        for (int i = 0; i < real.n_o; ++i) alt[i] = i % 2 == 0 ? 0.5 : -0.5;
        offsets.push_back(alt);
    }
    std::vector<double> matched = initial_observer_state(real, base_point);
    std::vector<double> x0;
    for (auto &v : sys.x0) x0.push_back(to_double(v));

    SimConfig run_cfg = cfg;
    run_cfg.store_trajectory = false;

    GainSearchResult best;
    bool found = false;
    std::vector<size_t> idx(entries, 0);
    while (true) {
        ++best.candidates_tried;
        // candidate gains in row-major grid order
        std::vector<std::vector<BigRational>> K(real.n_o,
                                                std::vector<BigRational>(real.m_y));
        for (int i = 0; i < real.n_o; ++i)
            for (int j = 0; j < real.m_y; ++j) {
                K[i][j] = ticks[idx[i * real.m_y + j]];
                field.gain[i][j] = to_double(K[i][j]);
            }

        double score = 0;
        bool viable = true;
        for (auto &offset : offsets) {
            std::vector<double> init = x0;
            for (int i = 0; i < real.n_o; ++i) init.push_back(matched[i] + offset[i]);
            SimResult run = integrate(field, init, run_cfg);
            if (!run.completed()) {
                viable = false;
                break;
            }
            score = std::max(score, run.tail_error);
        }
        if (viable && std::isfinite(score) && (!found || score < best.score)) {
            best.K = K;
            best.score = score;
            found = true;
        }

        // advance the grid odometer
        int pos = entries - 1;
        while (pos >= 0 && ++idx[pos] == ticks.size()) idx[pos--] = 0;
        if (pos < 0) break;
    }
    if (!found) throw NoStableCandidate();
    return best;
}

} // namespace ratobs
