#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "ratobs/inverse.hpp"
#include "ratobs/parser.hpp"
#include "testutil.hpp"

using namespace ratobs;
namespace tu = ratobs::testutil;

static RationalSystem load(const std::string &name) {
    std::ifstream in(std::string(RATOBS_SYSTEMS_DIR) + "/" + name + ".rsys");
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return parse_system(os.str());
}

TEST_CASE("triangular inverse of the polynomial system") {
    RationalSystem sys = load("polsys");
    SChain chain = build_s_chain(sys, 2);
    TriangularResult res = triangular_inverse(chain);
    REQUIRE(res.inverse.has_value());
    const InverseMap &inv = *res.inverse;
    CHECK(inv.kind == SystemKind::Polynomial);

    std::vector<int> tags = ensure_tags(sys.table, 2);
    auto T1 = RationalFunction::variable(sys.table, tags[0]);
    auto T2 = RationalFunction::variable(sys.table, tags[1]);
    auto a11 = RationalFunction::variable(sys.table, sys.table->find("a11"));
    auto a12 = RationalFunction::variable(sys.table, sys.table->find("a12"));
    CHECK(eq(inv.r[0], T1));
    CHECK(eq(inv.r[1], a11 / a12 * T1.pow(3) + T2 / a12));

    REQUIRE(inv.side_conditions.size() == 1);
    CHECK(inv.side_conditions[0] ==
          Polynomial::variable(sys.table, sys.table->find("a12")));
}

TEST_CASE("identity output map inverts with no side conditions") {
    RationalSystem sys = parse_system(
        "system s { states x1 = 0 x2 = 0; d x1 = x2; d x2 = -x1; output y1 = x1; output y2 = x2; }");
    SChain chain = build_s_chain(sys, 1);
    TriangularResult res = triangular_inverse(chain);
    REQUIRE(res.inverse.has_value());
    CHECK(res.inverse->side_conditions.empty());
    std::vector<int> tags = ensure_tags(sys.table, 2);
    CHECK(eq(res.inverse->r[0], RationalFunction::variable(sys.table, tags[0])));
    CHECK(eq(res.inverse->r[1], RationalFunction::variable(sys.table, tags[1])));
}

TEST_CASE("higher system is quadratic at order 2 and linear at order 3") {
    RationalSystem sys = load("higher");

    SChain chain2 = build_s_chain(sys, 2);
    TriangularResult res2 = triangular_inverse(chain2);
    REQUIRE_FALSE(res2.inverse.has_value());
    CHECK(res2.failure->equation == 2);
    CHECK(res2.failure->degree_profile.find("x2^2") != std::string::npos);

    SChain chain3 = build_s_chain(sys, 3);
    TriangularResult res3 = triangular_inverse(chain3);
    REQUIRE(res3.inverse.has_value());
    const InverseMap &inv = *res3.inverse;

    // x2 = -(c11/c12) T1 + (1/c12) T3 - c14/c12
    auto p = [&](const char *n) {
        return RationalFunction::variable(sys.table, sys.table->find(n));
    };
    auto c = [&](long v) { return RationalFunction::constant(sys.table, v); };
    RationalFunction a12 = p("a12"), a13 = p("a13"), a14 = p("a14"), a21 = p("a21"),
                     a22 = p("a22");
    RationalFunction c11 = c(4) * a21 * a21;
    RationalFunction c12 = a12 * a21 * (a13 + a14) - c(2) * a12 * a22;
    RationalFunction c14 = a12 * a22 * (a13 + a14) - c(2) * a12 * a21 * a13 * a14;
    std::vector<int> tags = ensure_tags(sys.table, 3);
    auto T1 = RationalFunction::variable(sys.table, tags[0]);
    auto T3 = RationalFunction::variable(sys.table, tags[2]);
    CHECK(eq(inv.r[0], T1));
    CHECK(eq(inv.r[1], -(c11 / c12) * T1 + T3 / c12 - c14 / c12));

    // recorded side condition is c12 (up to unit)
    REQUIRE(inv.side_conditions.size() == 1);
    Polynomial want = c12.num().integer_primitive();
    CHECK(inv.side_conditions[0] == want);
}

TEST_CASE("groebner inverse of the michaelis chain") {
    RationalSystem sys = load("michaelis");
    SChain chain = build_s_chain(sys, 2);
    GroebnerInverseResult res = groebner_inverse(chain, {});
    REQUIRE(res.inverse.has_value());

    std::vector<int> tags = ensure_tags(sys.table, 2);
    auto T1 = RationalFunction::variable(sys.table, tags[0]);
    auto T2 = RationalFunction::variable(sys.table, tags[1]);
    auto one = RationalFunction::constant(sys.table, 1);
    auto two = RationalFunction::constant(sys.table, 2);
    CHECK(eq(res.inverse->r[0], two * T2 / (one - T2)));
    CHECK(eq(res.inverse->r[1], T1));

    SUBCASE("agrees with the triangular route") {
        TriangularResult tri = triangular_inverse(chain);
        REQUIRE(tri.inverse.has_value());
        for (int i = 0; i < sys.n(); ++i)
            CHECK(eq(tri.inverse->r[i], res.inverse->r[i]));
    }
}

TEST_CASE("square of a single state is not invertible at order 1") {
    RationalSystem sys =
        parse_system("system s { states x1 = 1; d x1 = 0; output y = x1^2; }");
    SChain chain = build_s_chain(sys, 1);
    GroebnerInverseResult res = groebner_inverse(chain, {});
    CHECK_FALSE(res.inverse.has_value());
    CHECK(res.detail.find("x1") != std::string::npos);
}

TEST_CASE("observability indices of the example systems") {
    SUBCASE("polsys") {
        RationalSystem sys = load("polsys");
        ObservabilityResult res = find_observability_index(sys);
        REQUIRE(res.inverse.has_value());
        CHECK(res.m_o == 2);
        CHECK(res.chain.length() == 2);
        CHECK(res.inverse->method == InverseMap::Method::Triangular);
    }
    SUBCASE("higher: index above the state dimension") {
        RationalSystem sys = load("higher");
        ObservabilityResult res = find_observability_index(sys);
        REQUIRE(res.inverse.has_value());
        CHECK(res.m_o == 3);
        CHECK(res.m_o > sys.n());
    }
    SUBCASE("michaelis") {
        RationalSystem sys = load("michaelis");
        ObservabilityResult res = find_observability_index(sys);
        REQUIRE(res.inverse.has_value());
        CHECK(res.m_o == 2);
    }
    SUBCASE("unobservable system reports failure up to the bound") {
        RationalSystem sys = parse_system(
            "system s { states x1 = 1 x2 = 1; d x1 = -x1; d x2 = -x2; output y = x1; }");
        ObservabilityResult res = find_observability_index(sys);
        CHECK_FALSE(res.inverse.has_value());
        CHECK(res.m_max_tried == default_m_max(sys));
        CHECK_FALSE(res.log.empty());
    }
}

TEST_CASE("round trips hold symbolically and at random rational points") {
    tu::Rng rng(515);
    for (const char *name : {"michaelis", "polsys", "higher", "ratsys", "twocomp"}) {
        CAPTURE(name);
        RationalSystem sys = load(name);
        ObservabilityResult res = find_observability_index(sys);
        REQUIRE(res.inverse.has_value());
        CHECK(round_trip_holds(*res.inverse, res.chain));

        // forward trip r(s(xi)) = xi, exactly, at random admissible points
        int checked = 0;
        std::vector<int> tags = ensure_tags(sys.table, res.chain.length());
        for (int attempt = 0; attempt < 2000 && checked < 25; ++attempt) {
            std::vector<BigRational> point(sys.table->size(), 0);
            for (int v = 0; v < sys.table->size(); ++v) point[v] = tu::random_rational(rng, -6, 6);
            // a Groebner witness is tied to its own parameter instance
            for (auto &[name, val] : res.inverse->param_instance)
                point[sys.table->find(name)] = val;

            bool admissible = true;
            for (auto &a : sys.assumptions)
                if (a.eval(point) == 0) admissible = false;
            for (auto &sc : res.inverse->side_conditions)
                if (sc.eval(point) == 0) admissible = false;
            for (int k = 0; admissible && k < res.chain.length(); ++k) {
                auto val = eval_rational(res.chain.entries[k], point);
                if (!val)
                    admissible = false;
                else
                    point[tags[k]] = *val;
            }
            if (!admissible) continue;

            bool defined = true;
            bool all_states_match = true;
            for (int i = 0; i < sys.n() && defined; ++i) {
                auto back = eval_rational(res.inverse->r[i], point);
                if (!back)
                    defined = false; // off the inverse's domain; not an admissible point
                else if (*back != point[sys.state_vars[i]])
                    all_states_match = false;
            }
            if (!defined) continue;
            CHECK(all_states_match);
            ++checked;
        }
        CHECK(checked == 25);
    }
}

TEST_CASE("jacobi condition") {
    RationalSystem sys = load("polsys");
    auto x1 = RationalFunction::variable(sys.table, sys.state_vars[0]);
    auto x2 = RationalFunction::variable(sys.table, sys.state_vars[1]);

    SUBCASE("unit determinant") {
        JacobiResult res = jacobi_condition({x1, x2 + x1.pow(3)}, sys.state_vars);
        CHECK(res.verdict == JacobiVerdict::Holds);
        CHECK(eq(res.det, RationalFunction::constant(sys.table, 1)));
        CHECK_FALSE(res.side_condition.has_value());
    }

    SUBCASE("chain map of polsys holds with a parameter side condition") {
        SChain chain = build_s_chain(sys, 2);
        JacobiResult res = jacobi_condition(chain.entries, sys.state_vars);
        CHECK(res.verdict == JacobiVerdict::Holds);
        int a12 = sys.table->find("a12");
        CHECK(eq(res.det, RationalFunction::variable(sys.table, a12)));
        REQUIRE(res.side_condition.has_value());
        CHECK(*res.side_condition == Polynomial::variable(sys.table, a12));
    }

    SUBCASE("state-dependent determinant fails") {
        JacobiResult res = jacobi_condition({x1.pow(2), x2}, sys.state_vars);
        CHECK(res.verdict == JacobiVerdict::Fails);
        CHECK(eq(res.det, RationalFunction::constant(sys.table, 2) * x1));
    }

    SUBCASE("rational map is rejected") {
        CHECK_THROWS_AS(jacobi_condition({x1 / (x1 + x2), x2}, sys.state_vars),
                        NonPolynomialMap);
    }
}

TEST_CASE("oracle agreement between the two inverse routes at random points") {
    RationalSystem sys = load("polsys");
    SChain chain = build_s_chain(sys, 2);
    TriangularResult tri = triangular_inverse(chain);
    REQUIRE(tri.inverse.has_value());

    tu::Rng rng(99);
    auto params = random_admissible_parameters(sys, 7);
    GroebnerInverseResult grb = groebner_inverse(chain, params);
    REQUIRE(grb.inverse.has_value());

    // instantiate the triangular inverse at the same parameters and compare
    Bindings bind;
    for (auto &[v, val] : params) bind[v] = RationalFunction::constant(sys.table, val);
    for (int i = 0; i < sys.n(); ++i) {
        RationalFunction tri_at = substitute(tri.inverse->r[i], bind);
        CHECK(eq(tri_at, grb.inverse->r[i]));
    }
}
