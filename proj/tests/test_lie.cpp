#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "ratobs/lie.hpp"
#include "ratobs/parser.hpp"

using namespace ratobs;

static RationalSystem load(const std::string &name) {
    std::ifstream in(std::string(RATOBS_SYSTEMS_DIR) + "/" + name + ".rsys");
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return parse_system(os.str());
}

TEST_CASE("lie derivatives of the michaelis outputs") {
    RationalSystem sys = load("michaelis");
    auto x1 = RationalFunction::variable(sys.table, sys.state_vars[0]);
    auto x2 = RationalFunction::variable(sys.table, sys.state_vars[1]);
    auto c = [&](long v) { return RationalFunction::constant(sys.table, v); };

    CHECK(eq(lie_derivative(x2, sys), x1 / (x1 + c(2))));
    CHECK(eq(lie_derivative(x1 / (x1 + c(2)), sys), -c(2) * x1 / (x1 + c(2)).pow(3)));
    CHECK(lie_derivative(c(5) / c(7), sys).is_zero());
}

TEST_CASE("chain construction") {
    SUBCASE("polsys at order 2") {
        RationalSystem sys = load("polsys");
        SChain chain = build_s_chain(sys, 2);
        REQUIRE(chain.length() == 2);
        auto x1 = RationalFunction::variable(sys.table, sys.state_vars[0]);
        auto x2 = RationalFunction::variable(sys.table, sys.state_vars[1]);
        auto a11 = RationalFunction::variable(sys.table, sys.table->find("a11"));
        auto a12 = RationalFunction::variable(sys.table, sys.table->find("a12"));
        CHECK(eq(chain.entries[0], x1));
        CHECK(eq(chain.entries[1], -a11 * x1.pow(3) + a12 * x2));
    }

    SUBCASE("order 1 is the output map") {
        RationalSystem sys = load("michaelis");
        SChain chain = build_s_chain(sys, 1);
        REQUIRE(chain.length() == 1);
        CHECK(eq(chain.entries[0], sys.h[0]));
    }

    SUBCASE("higher system: third entry is linear with the expected coefficients") {
        RationalSystem sys = load("higher");
        SChain chain = build_s_chain(sys, 3);
        REQUIRE(chain.length() == 3);
        int x1 = sys.state_vars[0], x2 = sys.state_vars[1];
        const RationalFunction &s3 = chain.entries[2];
        REQUIRE(s3.is_polynomial());
        auto v = [&](const char *n) {
            return Polynomial::variable(sys.table, sys.table->find(n));
        };
        Polynomial a12 = v("a12"), a13 = v("a13"), a14 = v("a14"), a21 = v("a21"),
                   a22 = v("a22");
        Polynomial two = Polynomial::constant(sys.table, 2);
        CHECK(s3.num().degree_in(x1) == 1);
        CHECK(s3.num().degree_in(x2) == 1);
        Polynomial c11 = s3.num().coefficient_of(x1, 1).coefficient_of(x2, 0);
        Polynomial c12 = s3.num().coefficient_of(x2, 1).coefficient_of(x1, 0);
        Polynomial c14 = s3.num().coefficient_of(x1, 0).coefficient_of(x2, 0);
        CHECK(c11 == a21 * a21 * Polynomial::constant(sys.table, 4));
        CHECK(c12 == a12 * a21 * (a13 + a14) - two * a12 * a22);
        CHECK(c14 == a12 * a22 * (a13 + a14) - two * a12 * a21 * a13 * a14);
    }

    SUBCASE("extension reuses prior entries") {
        RationalSystem sys = load("michaelis");
        SChain c2 = build_s_chain(sys, 2);
        SChain c4 = build_s_chain(sys, 4, &c2);
        REQUIRE(c4.length() == 4);
        for (int i = 0; i < 2; ++i)
            CHECK(eq(c4.entries[i], c2.entries[i]));
        SChain fresh = build_s_chain(sys, 4);
        for (int i = 0; i < 4; ++i)
            CHECK(eq(c4.entries[i], fresh.entries[i]));
    }
}

TEST_CASE("chain consistency: each entry is the lie derivative of its predecessor") {
    for (const char *name : {"michaelis", "polsys", "ratsys", "twocomp"}) {
        CAPTURE(name);
        RationalSystem sys = load(name);
        SChain chain = build_s_chain(sys, 3);
        for (int k = 0; k + sys.m_y() < chain.length(); ++k)
            CHECK(eq(lie_derivative(chain.entries[k], sys), chain.entries[k + sys.m_y()]));
    }
}

TEST_CASE("term ceiling turns expression swell into a clean error") {
    RationalSystem sys = load("polsys");
    CHECK_THROWS_AS(build_s_chain(sys, 8, nullptr, /*term_ceiling=*/10), ResourceExceeded);
}
