#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "ratobs/parser.hpp"
#include "testutil.hpp"

using namespace ratobs;

static std::string read_file(const std::string &path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

static std::string systems_dir() { return RATOBS_SYSTEMS_DIR; }

TEST_CASE("michaelis source resolves its bound parameters") {
    RationalSystem sys = parse_system(read_file(systems_dir() + "/michaelis.rsys"));
    CHECK(sys.n() == 2);
    CHECK(sys.m_y() == 1);
    CHECK(sys.kind == SystemKind::Rational);
    CHECK(sys.x0 == std::vector<BigRational>{1, 1});

    auto x1 = RationalFunction::variable(sys.table, sys.state_vars[0]);
    auto x2 = RationalFunction::variable(sys.table, sys.state_vars[1]);
    auto c = [&](long v) { return RationalFunction::constant(sys.table, v); };
    CHECK(eq(sys.f[0], -x1 + (x1 + x1.pow(2)) / (x1 + c(2))));
    CHECK(eq(sys.f[0], -x1 / (x1 + c(2))));
    CHECK(eq(sys.f[1], x1 / (x1 + c(2))));
    CHECK(eq(sys.h[0], x2));
}

TEST_CASE("one-state polynomial system") {
    RationalSystem sys = parse_system("system s { states x1 = 0; dx1 = 0; output y = x1; }");
    CHECK(sys.n() == 1);
    CHECK(sys.kind == SystemKind::Polynomial);
    CHECK(sys.f[0].is_zero());
}

TEST_CASE("polsys keeps unbound parameters and assumptions") {
    RationalSystem sys = parse_system(read_file(systems_dir() + "/polsys.rsys"));
    CHECK(sys.kind == SystemKind::Polynomial);
    CHECK_FALSE(sys.all_params_bound());
    int a12 = sys.table->find("a12");
    REQUIRE(a12 >= 0);
    bool found = false;
    for (auto &a : sys.assumptions)
        if (a == Polynomial::variable(sys.table, a12)) found = true;
    CHECK(found);
}

TEST_CASE("parse after render is structural identity") {
    for (const char *name :
         {"michaelis", "polsys", "polsys_num", "higher", "ratsys", "twocomp", "linear2"}) {
        CAPTURE(name);
        RationalSystem sys = parse_system(read_file(systems_dir() + "/" + name + ".rsys"));
        RationalSystem again = parse_system(render_system(sys));
        CHECK(structurally_equal(sys, again));
        CHECK(structurally_equal(again, sys));
    }
}

TEST_CASE("render of a zero dynamics reads back as 0") {
    RationalSystem sys = parse_system("system s { states x = 2; d x = 0; output y = x; }");
    std::string text = render_system(sys);
    CHECK(text.find("d x = 0;") != std::string::npos);
}

TEST_CASE("diagnostics") {
    SUBCASE("empty input") { CHECK_THROWS_AS(parse_system(""), SyntaxError); }
    SUBCASE("missing state equation") {
        CHECK_THROWS_AS(parse_system("system s { states x = 0 z = 1; d x = 1; output y = x; }"),
                        DimensionMismatch);
    }
    SUBCASE("unknown symbol") {
        CHECK_THROWS_AS(parse_system("system s { states x = 0; d x = q; output y = x; }"),
                        UndefinedSymbol);
    }
    SUBCASE("denominator vanishing at the initial state") {
        CHECK_THROWS_AS(parse_system("system s { states x = 1; d x = 1/(x - 1); output y = x; }"),
                        DenominatorZeroAtX0);
    }
    SUBCASE("position of the failure is reported") {
        try {
            parse_system("system s {\n  states x = 0;\n  d x = ((x;\n output y = x; }");
            FAIL("expected a syntax error");
        } catch (const SyntaxError &e) {
            CHECK(e.line == 3);
            CHECK(e.column > 0);
        }
    }
}

TEST_CASE("malformed fuzz inputs produce diagnostics, never crashes") {
    std::mt19937_64 rng(12345);
    const std::string alphabet = "systemparamoutput{}()=+-*/^;!#.0123456789xyz_ \n";
    std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
    std::uniform_int_distribution<int> len(0, 120);
    int diagnostics = 0;
    for (int i = 0; i < 500; ++i) {
        std::string s;
        int L = len(rng);
        for (int k = 0; k < L; ++k) s += alphabet[pick(rng)];
        try {
            parse_system(s);
        } catch (const Error &) {
            ++diagnostics;
        }
    }
    CHECK(diagnostics > 400);
}
