#include "ratobs/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ratobs/errors.hpp"

namespace ratobs {

const char *to_string(SimStatus s) {
    switch (s) {
    case SimStatus::Converged: return "converged";
    case SimStatus::Diverged: return "diverged";
    case SimStatus::PoleCrossing: return "pole_crossing";
    case SimStatus::NonFinite: return "non_finite";
    case SimStatus::LeftOrthant: return "left_orthant";
    }
    return "unknown";
}

double CompiledPoly::eval(const std::vector<double> &point) const {
    double acc = 0;
    for (const Term &t : terms) {
        double v = t.c;
        for (auto &[var, e] : t.pows) {
            double x = point[var];
            switch (e) {
            case 1: v *= x; break;
            case 2: v *= x * x; break;
            case 3: v *= x * x * x; break;
            default: v *= std::pow(x, e);
            }
        }
        acc += v;
    }
    return acc;
}

static CompiledPoly compile(const Polynomial &p) {
    CompiledPoly out;
    for (auto &[m, c] : p.terms()) {
        CompiledPoly::Term t;
        t.c = to_double(c);
        t.pows = m.exponents();
        out.terms.push_back(std::move(t));
    }
    return out;
}

CompiledRational compile(const RationalFunction &g) {
    return {compile(g.num()), compile(g.den())};
}

namespace {

struct StageEval {
    // returns false on a pole; sets nonfinite on overflow
    bool pole = false;
    bool nonfinite = false;
};

StageEval eval_field(const FieldSpec &field, std::vector<double> &point,
                     const std::vector<double> &state, std::vector<double> &deriv,
                     double eps_den) {
    StageEval ev;
    for (size_t i = 0; i < field.slots.size(); ++i) point[field.slots[i]] = state[i];
    for (auto &[slot, g] : field.defines) {
        double den = g.den.eval(point);
        if (std::abs(den) < eps_den) {
            ev.pole = true;
            return ev;
        }
        point[slot] = g.num.eval(point) / den;
    }
    for (size_t i = 0; i < field.rhs.size(); ++i) {
        double den = field.rhs[i].den.eval(point);
        if (std::abs(den) < eps_den) {
            ev.pole = true;
            return ev;
        }
        deriv[i] = field.rhs[i].num.eval(point) / den;
    }
    if (!field.gain.empty()) {
        for (size_t j = 0; j < field.gain_diffs.size(); ++j) {
            double diff = point[field.gain_diffs[j].first] - point[field.gain_diffs[j].second];
            size_t base = field.rhs.size() - field.gain.size();
            for (size_t i = 0; i < field.gain.size(); ++i)
                deriv[base + i] += field.gain[i][j] * diff;
        }
    }
    for (double d : deriv)
        if (!std::isfinite(d)) ev.nonfinite = true;
    return ev;
}

} // namespace

SimResult integrate(const FieldSpec &field, const std::vector<double> &init,
                    const SimConfig &cfg) {
    if (cfg.step <= 0 || cfg.horizon < cfg.step) throw Error("bad step/horizon");
    const size_t dim = field.slots.size();
    if (init.size() != dim) throw DimensionMismatch("initial state size");

    SimResult result;
    std::vector<double> point = field.base_point;
    std::vector<double> x = init;
    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);

    const long nsteps = static_cast<long>(std::llround(cfg.horizon / cfg.step));
    const double tail_start = 0.8 * cfg.horizon;

    auto record = [&](double t, long step_index) {
        if (!field.outputs.empty()) {
            std::vector<double> ey(field.outputs.size());
            for (size_t i = 0; i < field.slots.size(); ++i) point[field.slots[i]] = x[i];
            for (auto &[slot, g] : field.defines) {
                double den = g.den.eval(point);
                if (std::abs(den) < cfg.eps_den) return false;
                point[slot] = g.num.eval(point) / den;
            }
            double mag = 0;
            for (size_t j = 0; j < field.outputs.size(); ++j) {
                double den = field.outputs[j].den.eval(point);
                if (std::abs(den) < cfg.eps_den) return false;
                ey[j] = field.outputs[j].num.eval(point) / den;
                mag = std::max(mag, std::abs(ey[j]));
            }
            result.sup_error = std::max(result.sup_error, mag);
            if (t >= tail_start) result.tail_error = std::max(result.tail_error, mag);
            if (cfg.store_trajectory && step_index % cfg.record_stride == 0)
                result.e_y.push_back(std::move(ey));
        }
        if (cfg.store_trajectory && step_index % cfg.record_stride == 0) {
            result.times.push_back(t);
            result.states.push_back(x);
        }
        return true;
    };

    // the initial state must sit inside every denominator guard
    {
        StageEval ev = eval_field(field, point, x, k1, cfg.eps_den);
        if (ev.pole) {
            result.status = SimStatus::PoleCrossing;
            result.event_time = 0;
            return result;
        }
    }
    if (!record(0.0, 0)) {
        result.status = SimStatus::PoleCrossing;
        result.event_time = 0;
        return result;
    }

    double t = 0;
    for (long step = 1; step <= nsteps; ++step) {
        const double h = cfg.step;
        auto stage = [&](const std::vector<double> &state, std::vector<double> &k) {
            return eval_field(field, point, state, k, cfg.eps_den);
        };
        StageEval ev = stage(x, k1);
        if (!ev.pole && !ev.nonfinite) {
            for (size_t i = 0; i < dim; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
            ev = stage(tmp, k2);
        }
        if (!ev.pole && !ev.nonfinite) {
            for (size_t i = 0; i < dim; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
            ev = stage(tmp, k3);
        }
        if (!ev.pole && !ev.nonfinite) {
            for (size_t i = 0; i < dim; ++i) tmp[i] = x[i] + h * k3[i];
            ev = stage(tmp, k4);
        }
        if (ev.pole) {
            result.status = SimStatus::PoleCrossing;
            result.event_time = t;
            return result;
        }
        if (ev.nonfinite) {
            result.status = SimStatus::NonFinite;
            result.event_time = t;
            return result;
        }
        for (size_t i = 0; i < dim; ++i)
            x[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        t = h * static_cast<double>(step);

        for (double xi : x) {
            if (!std::isfinite(xi) || std::abs(xi) > cfg.blowup) {
                result.status = SimStatus::NonFinite;
                result.event_time = t;
                return result;
            }
        }
        if (cfg.positive_orthant_guard)
            for (int slot : field.orthant_slots) {
                size_t idx = std::find(field.slots.begin(), field.slots.end(), slot) -
                             field.slots.begin();
                if (idx < dim && x[idx] < 0) {
                    result.status = SimStatus::LeftOrthant;
                    result.event_time = t;
                    return result;
                }
            }
        if (!record(t, step)) {
            result.status = SimStatus::PoleCrossing;
            result.event_time = t;
            return result;
        }
    }
    result.status =
        result.tail_error < cfg.converged_tol ? SimStatus::Converged : SimStatus::Diverged;
    return result;
}

FieldSpec performance_field(const RationalSystem &sys, const Observer &obs,
                            const std::vector<double> &base_point) {
    FieldSpec field;
    field.base_point = base_point;
    field.base_point.resize(sys.table->size(), 0.0);
    field.slots = sys.state_vars;
    for (int v : obs.real.xo_vars) field.slots.push_back(v);
    for (auto &fi : sys.f) field.rhs.push_back(compile(fi));

    // the measured output feeds the observer
    for (int j = 0; j < obs.m_y; ++j)
        field.defines.emplace_back(obs.y_vars[j], compile(sys.h[j]));

    // observer dynamics split as base + K (y - C_o x_o) so gain search can
    // swap K without recompiling
    std::vector<std::vector<RationalFunction>> base(obs.n_o);
    for (int i = 0; i < obs.n_o; ++i) {
        RationalFunction acc = obs.real.f_or[i];
        for (int j = 0; j < obs.m_y; ++j) {
            if (obs.k_o[i][j].is_zero()) continue;
            RationalFunction diff =
                RationalFunction::variable(sys.table, obs.y_vars[j]) -
                RationalFunction::variable(sys.table, obs.real.xo_vars[j]);
            acc = acc + obs.k_o[i][j] * diff;
        }
        field.rhs.push_back(compile(acc));
    }
    field.gain.assign(obs.n_o, std::vector<double>(obs.m_y, 0.0));
    for (int i = 0; i < obs.n_o; ++i)
        for (int j = 0; j < obs.m_y; ++j) field.gain[i][j] = to_double(obs.K[i][j]);
    for (int j = 0; j < obs.m_y; ++j)
        field.gain_diffs.emplace_back(obs.y_vars[j], obs.real.xo_vars[j]);

    // e_y = h(x) - C_o x_o
    for (int j = 0; j < obs.m_y; ++j) {
        RationalFunction ey =
            sys.h[j] - RationalFunction::variable(sys.table, obs.real.xo_vars[j]);
        field.outputs.push_back(compile(ey));
    }
    field.orthant_slots = sys.state_vars;
    return field;
}

FieldSpec system_field(const RationalSystem &sys, const std::vector<double> &base_point) {
    FieldSpec field;
    field.base_point = base_point;
    field.base_point.resize(sys.table->size(), 0.0);
    field.slots = sys.state_vars;
    for (auto &fi : sys.f) field.rhs.push_back(compile(fi));
    field.orthant_slots = sys.state_vars;
    return field;
}

SimResult performance_sim(const RationalSystem &sys, const Observer &obs, const SimConfig &cfg,
                          const std::vector<double> &base_point,
                          std::optional<std::vector<double>> x_o0,
                          std::optional<std::vector<double>> x0) {
    FieldSpec field = performance_field(sys, obs, base_point);
    std::vector<double> init;
    if (x0) {
        init = *x0;
    } else {
        for (auto &v : sys.x0) init.push_back(to_double(v));
    }
    std::vector<double> xo = x_o0 ? *x_o0 : initial_observer_state(obs.real, field.base_point);
    init.insert(init.end(), xo.begin(), xo.end());
    return integrate(field, init, cfg);
}

Eigen::MatrixXd linearize(const std::vector<RationalFunction> &field,
                          const std::vector<int> &wrt, const std::vector<double> &point,
                          double eps_den) {
    const int n = static_cast<int>(field.size());
    const int m = static_cast<int>(wrt.size());
    Eigen::MatrixXd J(n, m);
    for (int i = 0; i < n; ++i) {
        if (std::abs(field[i].den().eval_double(point)) < eps_den)
            throw UndefinedAtPoint(field[i].str());
        for (int j = 0; j < m; ++j) {
            RationalFunction d = partial(field[i], wrt[j]);
            double den = d.den().eval_double(point);
            if (std::abs(den) < eps_den) throw UndefinedAtPoint(d.str());
            J(i, j) = d.num().eval_double(point) / den;
        }
    }
    return J;
}

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd &M) {
    if (M.rows() != M.cols()) throw DimensionMismatch("eigenvalues of a non-square matrix");
    if (M.rows() > 12) throw Error("eigenvalue routine is sized for n <= 12");
    for (int i = 0; i < M.rows(); ++i)
        for (int j = 0; j < M.cols(); ++j)
            if (!std::isfinite(M(i, j))) throw Error("non-finite matrix entry");

    Eigen::EigenSolver<Eigen::MatrixXd> solver(M, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw NoConvergence("QR iteration");

    std::vector<std::complex<double>> out;
    double scale = std::max(1.0, M.norm());
    const int n = static_cast<int>(M.rows());
    for (int i = 0; i < n; ++i) {
        std::complex<double> lambda = solver.eigenvalues()(i);
        Eigen::MatrixXcd shifted = M.cast<std::complex<double>>();
        shifted.diagonal().array() -= lambda;
        // residual: det(M - lambda I) should vanish relative to the scale
        std::complex<double> det = Eigen::FullPivLU<Eigen::MatrixXcd>(shifted).determinant();
        if (std::abs(det) > 1e-6 * std::pow(scale, n))
            throw NoConvergence("eigenvalue residual " + std::to_string(std::abs(det)));
        out.push_back(lambda);
    }
    std::sort(out.begin(), out.end(), [](auto a, auto b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return out;
}

int observability_rank(const Eigen::MatrixXd &A, const Eigen::MatrixXd &C) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(C.rows());
    Eigen::MatrixXd stacked(n * m, n);
    Eigen::MatrixXd block = C;
    for (int k = 0; k < n; ++k) {
        stacked.middleRows(k * m, m) = block;
        block = block * A;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
    double sigma_max = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    double threshold = n * sigma_max * 1e-12;
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > threshold) ++rank;
    return sigma_max == 0.0 ? 0 : rank;
}

void write_csv(std::ostream &os, const SimResult &result, int n, int n_o, int m_y) {
    os << "t";
    for (int i = 1; i <= n; ++i) os << ",x_" << i;
    for (int i = 1; i <= n_o; ++i) os << ",xo_" << i;
    for (int i = 1; i <= m_y; ++i) os << ",ey_" << i;
    os << "\n";
    os.precision(17);
    for (size_t k = 0; k < result.times.size(); ++k) {
        os << result.times[k];
        for (double v : result.states[k]) os << "," << v;
        if (k < result.e_y.size())
            for (double v : result.e_y[k]) os << "," << v;
        os << "\n";
    }
}

} // namespace ratobs
