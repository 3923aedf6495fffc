#pragma once

#include <vector>

namespace ratobs {

struct SimConfig {
    double step = 1e-3;
    double horizon = 50.0;
    double eps_den = 1e-9;     // |denominator| below this counts as a pole
    double converged_tol = 1e-6;
    double blowup = 1e12;
    int record_stride = 1;
    bool store_trajectory = true;
    bool positive_orthant_guard = false;
};

enum class SimStatus { Converged, Diverged, PoleCrossing, NonFinite, LeftOrthant };

const char *to_string(SimStatus s);

struct SimResult {
    SimStatus status = SimStatus::Diverged;
    double event_time = -1; // set for pole_crossing / non_finite / left_orthant
    std::vector<double> times;
    std::vector<std::vector<double>> states; // stacked (x, x_o) per sample
    std::vector<std::vector<double>> e_y;    // per sample; empty without an error output
    double tail_error = 0;                   // sup |e_y| over the last 20% of the horizon
    double sup_error = 0;                    // sup |e_y| over the whole run

    bool completed() const {
        return status == SimStatus::Converged || status == SimStatus::Diverged;
    }
};

} // namespace ratobs
