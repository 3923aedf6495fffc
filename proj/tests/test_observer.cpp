#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "ratobs/parser.hpp"
#include "ratobs/simulate.hpp"

using namespace ratobs;

static RationalSystem load(const std::string &name) {
    std::ifstream in(std::string(RATOBS_SYSTEMS_DIR) + "/" + name + ".rsys");
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return parse_system(os.str());
}

static OutputRealization realize(const RationalSystem &sys) {
    ObservabilityResult res = find_observability_index(sys);
    REQUIRE(res.inverse.has_value());
    return output_based_realization(sys, res.chain, *res.inverse);
}

TEST_CASE("nonlinear gain of the polynomial system") {
    RationalSystem sys = load("polsys");
    OutputRealization real = realize(sys);
    Observer obs = make_observer(real, zero_gain(real.n_o, real.m_y));

    auto p = [&](const char *n) {
        return RationalFunction::variable(sys.table, sys.table->find(n));
    };
    auto xo = [&](int i) { return RationalFunction::variable(sys.table, real.xo_vars[i]); };
    auto c = [&](long v) { return RationalFunction::constant(sys.table, v); };
    RationalFunction a11 = p("a11"), a22 = p("a22");

    CHECK(obs.k_o[0][0].is_zero());
    RationalFunction expect = -c(3) * a11 * a22 * xo(0).pow(2) - c(6) * a11 * xo(0) * xo(1);
    CHECK(eq(obs.k_o[1][0], expect));
}

TEST_CASE("drift independent of the first block leaves only the constant gain") {
    RationalSystem sys = load("linear2"); // b_o = 0 for the double integrator
    OutputRealization real = realize(sys);
    Observer obs = make_observer(real, {{BigRational(3)}, {BigRational(2)}});
    CHECK(obs.k_o[1][0].is_zero());
    // f_o = A_o x_o + K (y - C x_o)
    auto xo = [&](int i) { return RationalFunction::variable(sys.table, real.xo_vars[i]); };
    auto y = RationalFunction::variable(sys.table, obs.y_vars[0]);
    auto c = [&](long v) { return RationalFunction::constant(sys.table, v); };
    CHECK(eq(obs.f_o[0], xo(1) + c(3) * (y - xo(0))));
    CHECK(eq(obs.f_o[1], c(2) * (y - xo(0))));
}

TEST_CASE("nonlinear gain of the higher-order observer") {
    RationalSystem sys = load("higher");
    OutputRealization real = realize(sys);
    Observer obs = make_observer(real, zero_gain(real.n_o, real.m_y));

    auto p = [&](const char *n) {
        return RationalFunction::variable(sys.table, sys.table->find(n));
    };
    auto xo = [&](int i) { return RationalFunction::variable(sys.table, real.xo_vars[i]); };
    auto c = [&](long v) { return RationalFunction::constant(sys.table, v); };
    RationalFunction a12 = p("a12"), a13 = p("a13"), a14 = p("a14"), a21 = p("a21"),
                     a22 = p("a22");
    RationalFunction c11 = c(4) * a21 * a21;
    RationalFunction c12 = a12 * a21 * (a13 + a14) - c(2) * a12 * a22;
    RationalFunction c14 = a12 * a22 * (a13 + a14) - c(2) * a12 * a21 * a13 * a14;

    RationalFunction expect =
        c(3) * a21 * c11 +
        (a12 * c11 * c11 / (c12 * c12)) *
            (c(2) * xo(2) - c(2) * c11 * xo(0) - (c(2) * c14 + c12 * (a13 + a14)));
    CHECK(obs.k_o[0][0].is_zero());
    CHECK(obs.k_o[1][0].is_zero());
    CHECK(eq(obs.k_o[2][0], expect));
}

TEST_CASE("injection collapses when the observer output is fed back") {
    for (const char *name : {"michaelis", "polsys", "ratsys", "twocomp"}) {
        CAPTURE(name);
        RationalSystem sys = load(name);
        OutputRealization real = realize(sys);
        Observer obs = make_observer(real, zero_gain(real.n_o, real.m_y));
        Bindings y_to_xo;
        for (int j = 0; j < obs.m_y; ++j)
            y_to_xo[obs.y_vars[j]] =
                RationalFunction::variable(sys.table, real.xo_vars[j]);
        for (int i = 0; i < obs.n_o; ++i)
            CHECK(eq(substitute(obs.f_o[i], y_to_xo), real.f_or[i]));
    }
}

TEST_CASE("nonlinear gain matches finite differences of the drift") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    for (const char *name : {"polsys_num", "michaelis"}) {
        CAPTURE(name);
        RationalSystem sys = load(name);
        OutputRealization real = realize(sys);
        Observer obs = make_observer(real, zero_gain(real.n_o, real.m_y));
        const RationalFunction &b_last = real.b_o[real.m_y - 1];
        const RationalFunction &k_last = obs.k_o[real.n_o - 1][0];

        int checked = 0;
        for (int attempt = 0; attempt < 2000 && checked < 100; ++attempt) {
            std::vector<double> pt(sys.table->size(), 0.0);
            for (int v : real.xo_vars) pt[v] = coord(rng);
            auto den_ok = [&](const RationalFunction &g, const std::vector<double> &at) {
                return std::abs(g.den().eval_double(at)) > 0.3;
            };
            if (!den_ok(b_last, pt) || !den_ok(k_last, pt)) continue;
            double h = 1e-4;
            auto plus = pt, minus = pt;
            plus[real.xo_vars[0]] += h;
            minus[real.xo_vars[0]] -= h;
            auto plus2 = pt, minus2 = pt;
            plus2[real.xo_vars[0]] += h / 2;
            minus2[real.xo_vars[0]] -= h / 2;
            if (!den_ok(b_last, plus) || !den_ok(b_last, minus)) continue;
            auto val = [&](const std::vector<double> &at) {
                return b_last.num().eval_double(at) / b_last.den().eval_double(at);
            };
            double d1 = (val(plus) - val(minus)) / (2 * h);
            double d2 = (val(plus2) - val(minus2)) / h;
            double fd = (4 * d2 - d1) / 3; // one Richardson step
            double sym = k_last.num().eval_double(pt) / k_last.den().eval_double(pt);
            CHECK(std::abs(fd - sym) / std::max(1.0, std::abs(sym)) < 1e-6);
            ++checked;
        }
        CHECK(checked == 100);
    }
}

TEST_CASE("two-output system keeps the block-shift structure end to end") {
    RationalSystem sys = parse_system(
        "system two_out { states x1 = 1 x2 = 1 x3 = 0; d x1 = x3; d x2 = -x2; "
        "d x3 = -x1 - x3; output y1 = x1; output y2 = x2; }");
    ObservabilityResult res = find_observability_index(sys);
    REQUIRE(res.inverse.has_value());
    CHECK(res.m_o == 2);
    REQUIRE(res.chain.length() == 4); // n_o = m_o * m_y > n

    OutputRealization real = output_based_realization(sys, res.chain, *res.inverse);
    auto xo = [&](int i) { return RationalFunction::variable(sys.table, real.xo_vars[i]); };
    CHECK(eq(real.f_or[0], xo(2)));
    CHECK(eq(real.f_or[1], xo(3)));
    CHECK(eq(real.b_o[0], -xo(0) - xo(2)));
    CHECK(eq(real.b_o[1], xo(1)));

    Observer obs = make_observer(real, zero_gain(real.n_o, real.m_y));
    // the gain block sits in the last output block only
    for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l) CHECK(obs.k_o[j][l].is_zero());
    auto c = [&](long v) { return RationalFunction::constant(sys.table, v); };
    CHECK(eq(obs.k_o[2][0], -c(1)));
    CHECK(eq(obs.k_o[2][1], c(0)));
    CHECK(eq(obs.k_o[3][0], c(0)));
    CHECK(eq(obs.k_o[3][1], c(1)));

    std::vector<double> base(sys.table->size(), 0.0);
    SimConfig cfg;
    cfg.horizon = 10.0;
    cfg.store_trajectory = false;
    SimResult run = performance_sim(sys, obs, cfg, base);
    REQUIRE(run.completed());
    CHECK(run.sup_error < 1e-6);
}

TEST_CASE("numeric stability region of the error dynamics") {
    // linearized error dynamics at the origin for the unit-parameter cubic
    // system: [[-k1, 1], [-k2, -1]]; stable iff k1 > -1 and k1 + k2 > 0.
    // verified numerically through the eigensolver rather than asserted from
    // any closed-form inequality
    auto stable = [](double k1, double k2) {
        Eigen::MatrixXd A(2, 2);
        A << -k1, 1, -k2, -1;
        for (auto &l : eigenvalues(A))
            if (l.real() >= 0) return false;
        return true;
    };
    for (double k1 : {-2.0, -0.5, 0.0, 1.0, 3.0})
        for (double k2 : {-2.0, -0.5, 0.5, 2.0}) {
            bool expect = k1 > -1.0 && k1 + k2 > 0.0;
            CAPTURE(k1);
            CAPTURE(k2);
            CHECK(stable(k1, k2) == expect);
        }
}

TEST_CASE("pole placement") {
    Eigen::MatrixXd A(2, 2);
    A << 0, 1, 0, 0;
    Eigen::RowVectorXd C(2);
    C << 1, 0;

    SUBCASE("double integrator to {-1,-2} gives K=(3,2)") {
        Eigen::VectorXd K = pole_place(A, C, {{-1, 0}, {-2, 0}});
        CHECK(K(0) == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(K(1) == doctest::Approx(2.0).epsilon(1e-12));
        Eigen::MatrixXd closed = A - K * C;
        auto ev = eigenvalues(closed);
        CHECK(std::abs(ev[0] - std::complex<double>(-2, 0)) < 1e-8);
        CHECK(std::abs(ev[1] - std::complex<double>(-1, 0)) < 1e-8);
    }

    SUBCASE("requesting the existing poles still yields a valid gain") {
        Eigen::MatrixXd A2(2, 2);
        A2 << 0, 1, -2, -3; // poles -1, -2 already
        Eigen::RowVectorXd C2(2);
        C2 << 1, 0;
        Eigen::VectorXd K = pole_place(A2, C2, {{-1, 0}, {-2, 0}});
        auto ev = eigenvalues(Eigen::MatrixXd(A2 - K * C2));
        CHECK(std::abs(ev[0] - std::complex<double>(-2, 0)) < 1e-8);
        CHECK(std::abs(ev[1] - std::complex<double>(-1, 0)) < 1e-8);
    }

    SUBCASE("complex poles must come in conjugate pairs") {
        CHECK_THROWS_AS(pole_place(A, C, {{-1, 1}, {-2, 0}}), Error);
        Eigen::VectorXd K = pole_place(A, C, {{-1, 1}, {-1, -1}});
        auto ev = eigenvalues(Eigen::MatrixXd(A - K * C));
        CHECK(std::abs(ev[0].real() + 1) < 1e-8);
        CHECK(std::abs(std::abs(ev[0].imag()) - 1) < 1e-8);
    }

    SUBCASE("zero output row is unobservable") {
        CHECK_THROWS_AS(pole_place(A, Eigen::RowVectorXd::Zero(2), {{-1, 0}, {-2, 0}}),
                        UnobservablePair);
    }
}

TEST_CASE("matched start keeps the error at integration noise") {
    for (const char *name : {"polsys_num", "michaelis"}) {
        CAPTURE(name);
        RationalSystem sys = load(name);
        OutputRealization real = realize(sys);
        Observer obs = make_observer(real, zero_gain(real.n_o, real.m_y));
        std::vector<double> base(sys.table->size(), 0.0);
        SimConfig cfg;
        cfg.horizon = 20.0;
        cfg.store_trajectory = false;
        SimResult run = performance_sim(sys, obs, cfg, base);
        REQUIRE(run.completed());
        CHECK(run.sup_error < 1e-6);
    }
}

TEST_CASE("gain search") {
    RationalSystem sys = load("linear2");
    OutputRealization real = realize(sys);

    SUBCASE("pole-placed gain inside the grid scores at linear-theory level") {
        GainSpec spec;
        spec.grid_lo = 2;
        spec.grid_hi = 3;
        spec.grid_step = 1;
        spec.observer_offsets = {{0.5, -0.5}};
        SimConfig cfg;
        cfg.horizon = 50.0;
        GainSearchResult best = gain_search(sys, real, spec, cfg);
        CHECK(best.candidates_tried == 4);
        CHECK(best.score < 1e-8);
    }

    SUBCASE("zero offsets tie every candidate; the first grid point wins") {
        GainSpec spec;
        spec.grid_lo = 1;
        spec.grid_hi = 2;
        spec.grid_step = 1;
        spec.observer_offsets = {{0.0, 0.0}};
        SimConfig cfg;
        cfg.horizon = 5.0;
        GainSearchResult best = gain_search(sys, real, spec, cfg);
        CHECK(best.K[0][0] == 1);
        CHECK(best.K[1][0] == 1);
    }

    SUBCASE("empty grid") {
        GainSpec spec;
        spec.grid_lo = 1;
        spec.grid_hi = 0;
        spec.grid_step = 1;
        SimConfig cfg;
        CHECK_THROWS_AS(gain_search(sys, real, spec, cfg), NoStableCandidate);
    }

    SUBCASE("comparative run: zero gain trails a searched gain on polsys") {
        RationalSystem psys = load("polsys_num");
        OutputRealization preal = realize(psys);
        GainSpec spec;
        spec.grid_lo = 0;
        spec.grid_hi = 4;
        spec.grid_step = 2;
        spec.observer_offsets = {{0.5, -0.5}};
        SimConfig cfg;
        cfg.horizon = 20.0;
        GainSearchResult best = gain_search(psys, preal, spec, cfg);

        Observer tuned = make_observer(preal, best.K);
        Observer zero = make_observer(preal, zero_gain(preal.n_o, preal.m_y));
        std::vector<double> base(psys.table->size(), 0.0);
        std::vector<double> start = initial_observer_state(preal, base);
        start[0] += 0.5;
        start[1] -= 0.5;
        cfg.store_trajectory = false;
        SimResult with_gain = performance_sim(psys, tuned, cfg, base, start);
        SimResult without = performance_sim(psys, zero, cfg, base, start);
        REQUIRE(with_gain.completed());
        CHECK(with_gain.tail_error <= best.score + 1e-12);
        if (without.completed()) CHECK(without.tail_error > with_gain.tail_error);
    }
}
