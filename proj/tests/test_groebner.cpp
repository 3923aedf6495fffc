#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ratobs/groebner.hpp"
#include "ratobs/rational_function.hpp"

using namespace ratobs;

namespace {

bool contains_up_to_scalar(const GroebnerBasis &basis, const Polynomial &p) {
    Polynomial target = p.integer_primitive();
    for (auto &g : basis.generators)
        if (g == target || g == (-target).integer_primitive()) return true;
    return false;
}

} // namespace

TEST_CASE("principal and simple ideals") {
    auto table = make_table();
    int x = table->add("x", VarRole::State);
    int y = table->add("y", VarRole::State);
    auto X = Polynomial::variable(table, x);
    auto Y = Polynomial::variable(table, y);
    auto one = Polynomial::constant(table, 1);
    MonomialOrder lex = MonomialOrder::lex({x, y});

    SUBCASE("redundant generator collapses") {
        GroebnerBasis b = buchberger({X * X, X}, lex);
        REQUIRE(b.generators.size() == 1);
        CHECK(b.generators[0] == X);
    }

    SUBCASE("circle and diagonal eliminate x") {
        GroebnerBasis b = buchberger({X * X + Y * Y - one, X - Y}, lex);
        Polynomial expect = Y * Y.scaled(2) - one; // 2y^2 - 1
        CHECK(contains_up_to_scalar(b, expect));
        CHECK(is_groebner_basis(b));
    }
}

TEST_CASE("single denominator-cleared chain equation is its own basis") {
    auto table = make_table();
    int x1 = table->add("x1", VarRole::State);
    int t2 = table->add("T2", VarRole::Tag);
    auto X = Polynomial::variable(table, x1);
    auto T = Polynomial::variable(table, t2);
    auto two = Polynomial::constant(table, 2);
    MonomialOrder lex = MonomialOrder::lex({x1, t2});

    // (x1 + 2) T2 - x1 rearranged: (1 - T2) x1 - 2 T2
    Polynomial gen = (X + two) * T - X;
    GroebnerBasis b = buchberger({gen}, lex);
    REQUIRE(b.generators.size() == 1);
    Polynomial expect = (Polynomial::constant(table, 1) - T) * X - two * T;
    CHECK(contains_up_to_scalar(b, expect));
}

TEST_CASE("reduction is a normal form") {
    auto table = make_table();
    int x = table->add("x", VarRole::State);
    int y = table->add("y", VarRole::State);
    auto X = Polynomial::variable(table, x);
    auto Y = Polynomial::variable(table, y);
    auto one = Polynomial::constant(table, 1);
    MonomialOrder lex = MonomialOrder::lex({x, y});
    GroebnerBasis b = buchberger({X * X + Y * Y - one, X - Y}, lex);

    // members reduce to zero, non-members do not
    Polynomial member = (X * X + Y * Y - one) * Y + (X - Y) * X;
    CHECK(reduce(member, b.generators, lex).is_zero());
    CHECK_FALSE(reduce(X + one, b.generators, lex).is_zero());
}

TEST_CASE("budget produces a clean resource error") {
    auto table = make_table();
    std::vector<int> vars;
    for (int i = 0; i < 4; ++i) vars.push_back(table->add("z" + std::to_string(i), VarRole::State));
    auto V = [&](int i) { return Polynomial::variable(table, vars[i]); };
    auto one = Polynomial::constant(table, 1);
    // cyclic-4: hard enough to exhaust a tiny budget
    std::vector<Polynomial> gens = {
        V(0) + V(1) + V(2) + V(3),
        V(0) * V(1) + V(1) * V(2) + V(2) * V(3) + V(3) * V(0),
        V(0) * V(1) * V(2) + V(1) * V(2) * V(3) + V(2) * V(3) * V(0) + V(3) * V(0) * V(1),
        V(0) * V(1) * V(2) * V(3) - one,
    };
    GroebnerConfig cfg;
    cfg.max_reductions = 5;
    MonomialOrder lex = MonomialOrder::lex(vars);
    CHECK_THROWS_AS(buchberger(gens, lex, cfg), ResourceExceeded);
}

TEST_CASE("deterministic output") {
    auto table = make_table();
    int x = table->add("x", VarRole::State);
    int y = table->add("y", VarRole::State);
    int z = table->add("z", VarRole::State);
    auto X = Polynomial::variable(table, x);
    auto Y = Polynomial::variable(table, y);
    auto Z = Polynomial::variable(table, z);
    auto one = Polynomial::constant(table, 1);
    MonomialOrder lex = MonomialOrder::lex({x, y, z});
    std::vector<Polynomial> gens = {X * Y - Z, Y * Z - one, X - Y * Y};
    GroebnerBasis b1 = buchberger(gens, lex);
    GroebnerBasis b2 = buchberger(gens, lex);
    REQUIRE(b1.generators.size() == b2.generators.size());
    for (size_t i = 0; i < b1.generators.size(); ++i)
        CHECK(b1.generators[i] == b2.generators[i]);
    CHECK(is_groebner_basis(b1));
}
