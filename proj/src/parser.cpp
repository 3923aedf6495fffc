#include "ratobs/parser.hpp"

#include <algorithm>
#include <cctype>
#include <memory>
#include <sstream>

#include "ratobs/errors.hpp"

namespace ratobs {

namespace {

// ---------------------------------------------------------------------------
// Tokens

enum class Tok { Ident, Number, Punct, End };

struct Token {
    Tok kind;
    std::string text;
    int line, col;
};

class Lexer {
  public:
    explicit Lexer(const std::string &src) : src_(src) { advance(); }

    const Token &peek() const { return tok_; }

    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

  private:
    void advance() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else if (c == '\n') {
                ++line_, col_ = 1, ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++col_, ++pos_;
            } else {
                break;
            }
        }
        if (pos_ >= src_.size()) {
            tok_ = {Tok::End, "", line_, col_};
            return;
        }
        int line = line_, col = col_;
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_, ++col_;
            tok_ = {Tok::Ident, src_.substr(start, pos_ - start), line, col};
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            bool seen_dot = false;
            while (pos_ < src_.size() &&
                   (std::isdigit(static_cast<unsigned char>(src_[pos_])) ||
                    (src_[pos_] == '.' && !seen_dot))) {
                seen_dot |= src_[pos_] == '.';
                ++pos_, ++col_;
            }
            tok_ = {Tok::Number, src_.substr(start, pos_ - start), line, col};
        } else if (c == '!' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '=') {
            pos_ += 2, col_ += 2;
            tok_ = {Tok::Punct, "!=", line, col};
        } else if (std::string("{}();=+-*/^").find(c) != std::string::npos) {
            ++pos_, ++col_;
            tok_ = {Tok::Punct, std::string(1, c), line, col};
        } else {
            throw SyntaxError(line, col, "unexpected character '" + std::string(1, c) + "'");
        }
    }

    const std::string &src_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_{Tok::End, "", 1, 1};
};

// ---------------------------------------------------------------------------
// Expression AST (resolved against the variable table in a second phase)

struct ExprAst;
using ExprPtr = std::unique_ptr<ExprAst>;

struct ExprAst {
    enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow };
    Op op;
    BigRational value;   // Const
    std::string name;    // Var
    int line = 0, col = 0;
    int exponent = 0;    // Pow
    ExprPtr lhs, rhs;
};

ExprPtr make_node(ExprAst::Op op, ExprPtr lhs = nullptr, ExprPtr rhs = nullptr) {
    auto n = std::make_unique<ExprAst>();
    n->op = op;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

class ExprParser {
  public:
    explicit ExprParser(Lexer &lex) : lex_(lex) {}

    ExprPtr parse() { return parse_sum(); }

  private:
    bool at_punct(const std::string &p) const {
        return lex_.peek().kind == Tok::Punct && lex_.peek().text == p;
    }

    ExprPtr parse_sum() {
        ExprPtr acc = parse_term();
        while (at_punct("+") || at_punct("-")) {
            bool plus = lex_.next().text == "+";
            acc = make_node(plus ? ExprAst::Op::Add : ExprAst::Op::Sub, std::move(acc),
                            parse_term());
        }
        return acc;
    }

    ExprPtr parse_term() {
        ExprPtr acc = parse_unary();
        while (at_punct("*") || at_punct("/")) {
            bool times = lex_.next().text == "*";
            acc = make_node(times ? ExprAst::Op::Mul : ExprAst::Op::Div, std::move(acc),
                            parse_unary());
        }
        return acc;
    }

    ExprPtr parse_unary() {
        if (at_punct("-")) {
            lex_.next();
            return make_node(ExprAst::Op::Neg, parse_unary());
        }
        if (at_punct("+")) {
            lex_.next();
            return parse_unary();
        }
        return parse_power();
    }

    ExprPtr parse_power() {
        ExprPtr base = parse_atom();
        if (at_punct("^")) {
            Token caret = lex_.next();
            Token e = lex_.next();
            if (e.kind != Tok::Number || e.text.find('.') != std::string::npos)
                throw SyntaxError(caret.line, caret.col, "exponent must be a positive integer");
            long ev = std::stol(e.text);
            if (ev < 1)
                throw SyntaxError(e.line, e.col, "exponent must be a positive integer");
            auto n = make_node(ExprAst::Op::Pow, std::move(base));
            n->exponent = static_cast<int>(ev);
            return n;
        }
        return base;
    }

    ExprPtr parse_atom() {
        Token t = lex_.next();
        if (t.kind == Tok::Number) {
            auto n = make_node(ExprAst::Op::Const);
            n->value = parse_rational(t.text);
            return n;
        }
        if (t.kind == Tok::Ident) {
            auto n = make_node(ExprAst::Op::Var);
            n->name = t.text;
            n->line = t.line;
            n->col = t.col;
            return n;
        }
        if (t.kind == Tok::Punct && t.text == "(") {
            ExprPtr inner = parse_sum();
            Token close = lex_.next();
            if (close.kind != Tok::Punct || close.text != ")")
                throw SyntaxError(close.line, close.col, "expected ')'");
            return inner;
        }
        throw SyntaxError(t.line, t.col, "expected a number, name or '('");
    }

    Lexer &lex_;
};

// ---------------------------------------------------------------------------
// Declarations

struct SystemAst {
    std::string name;
    std::vector<std::pair<std::string, BigRational>> states;            // name, x0
    std::vector<std::pair<std::string, std::optional<BigRational>>> params;
    std::vector<std::pair<std::string, ExprPtr>> dynamics;              // state name, expr
    std::vector<std::pair<std::string, ExprPtr>> outputs;
    std::vector<ExprPtr> assumptions;
};

class SystemParser {
  public:
    explicit SystemParser(const std::string &src) : lex_(src) {}

    SystemAst parse() {
        expect_ident("system");
        SystemAst ast;
        ast.name = expect(Tok::Ident, "system name").text;
        expect_punct("{");
        while (!at_punct("}")) {
            Token t = lex_.next();
            if (t.kind != Tok::Ident) throw SyntaxError(t.line, t.col, "expected a declaration");
            if (t.text == "params") {
                parse_params(ast);
            } else if (t.text == "states") {
                parse_states(ast);
            } else if (t.text == "output") {
                std::string name = expect(Tok::Ident, "output name").text;
                expect_punct("=");
                ast.outputs.emplace_back(name, ExprParser(lex_).parse());
                expect_punct(";");
            } else if (t.text == "assume") {
                ExprPtr e = ExprParser(lex_).parse();
                expect_punct("!=");
                Token z = expect(Tok::Number, "0");
                if (z.text != "0") throw SyntaxError(z.line, z.col, "assume clause must end in != 0");
                expect_punct(";");
                ast.assumptions.push_back(std::move(e));
            } else if (t.text == "d") {
                std::string name = expect(Tok::Ident, "state name").text;
                expect_punct("=");
                ast.dynamics.emplace_back(name, ExprParser(lex_).parse());
                expect_punct(";");
            } else if (t.text.size() > 1 && t.text[0] == 'd') {
                // "dx1 = ..." shorthand
                expect_punct("=");
                ast.dynamics.emplace_back(t.text.substr(1), ExprParser(lex_).parse());
                expect_punct(";");
            } else {
                throw SyntaxError(t.line, t.col, "unknown declaration '" + t.text + "'");
            }
        }
        lex_.next(); // '}'
        Token end = lex_.next();
        if (end.kind != Tok::End) throw SyntaxError(end.line, end.col, "trailing input after '}'");
        return ast;
    }

  private:
    void parse_params(SystemAst &ast) {
        bool any = false;
        while (lex_.peek().kind == Tok::Ident) {
            std::string name = lex_.next().text;
            std::optional<BigRational> value;
            if (at_punct("=")) {
                lex_.next();
                value = parse_signed_rational();
            }
            ast.params.emplace_back(name, value);
            any = true;
        }
        if (!any) {
            Token t = lex_.peek();
            throw SyntaxError(t.line, t.col, "params declaration needs at least one name");
        }
        expect_punct(";");
    }

    void parse_states(SystemAst &ast) {
        bool any = false;
        while (lex_.peek().kind == Tok::Ident) {
            std::string name = lex_.next().text;
            expect_punct("=");
            ast.states.emplace_back(name, parse_signed_rational());
            any = true;
        }
        if (!any) {
            Token t = lex_.peek();
            throw SyntaxError(t.line, t.col, "states declaration needs at least one name");
        }
        expect_punct(";");
    }

    BigRational parse_signed_rational() {
        bool neg = false;
        while (at_punct("-") || at_punct("+")) neg ^= lex_.next().text == "-";
        Token n = expect(Tok::Number, "a rational literal");
        BigRational v = parse_rational(n.text);
        if (at_punct("/")) {
            lex_.next();
            Token d = expect(Tok::Number, "a denominator");
            BigRational dv = parse_rational(d.text);
            if (dv == 0) throw SyntaxError(d.line, d.col, "zero denominator");
            v /= dv;
        }
        return neg ? BigRational(-v) : v;
    }

    bool at_punct(const std::string &p) const {
        return lex_.peek().kind == Tok::Punct && lex_.peek().text == p;
    }

    Token expect(Tok kind, const std::string &what) {
        Token t = lex_.next();
        if (t.kind != kind)
            throw SyntaxError(t.line, t.col, "expected " + what + ", got '" + t.text + "'");
        return t;
    }

    void expect_punct(const std::string &p) {
        Token t = lex_.next();
        if (t.kind != Tok::Punct || t.text != p)
            throw SyntaxError(t.line, t.col, "expected '" + p + "', got '" + t.text + "'");
    }

    void expect_ident(const std::string &word) {
        Token t = lex_.next();
        if (t.kind != Tok::Ident || t.text != word)
            throw SyntaxError(t.line, t.col, "expected '" + word + "'");
    }

    Lexer lex_;
};

// ---------------------------------------------------------------------------
// Resolution

RationalFunction resolve(const ExprAst &e, const RationalSystem &sys) {
    switch (e.op) {
    case ExprAst::Op::Const:
        return RationalFunction::constant(sys.table, e.value);
    case ExprAst::Op::Var: {
        int v = sys.table->find(e.name);
        if (v < 0) throw UndefinedSymbol(e.name);
        if (sys.table->role(v) == VarRole::Parameter) {
            if (auto bound = sys.param_value(v))
                return RationalFunction::constant(sys.table, *bound);
        }
        return RationalFunction::variable(sys.table, v);
    }
    case ExprAst::Op::Neg:
        return -resolve(*e.lhs, sys);
    case ExprAst::Op::Add:
        return resolve(*e.lhs, sys) + resolve(*e.rhs, sys);
    case ExprAst::Op::Sub:
        return resolve(*e.lhs, sys) - resolve(*e.rhs, sys);
    case ExprAst::Op::Mul:
        return resolve(*e.lhs, sys) * resolve(*e.rhs, sys);
    case ExprAst::Op::Div:
        return resolve(*e.lhs, sys) / resolve(*e.rhs, sys);
    case ExprAst::Op::Pow:
        return resolve(*e.lhs, sys).pow(e.exponent);
    }
    throw Error("unreachable expression node");
}

} // namespace

bool denominator_trivial(const RationalFunction &g) {
    if (!g.table()) return true;
    for (int v : g.den().variables())
        if (g.table()->role(v) != VarRole::Parameter) return false;
    return true;
}

SystemKind kind_of(const std::vector<RationalFunction> &components) {
    for (auto &g : components)
        if (!denominator_trivial(g)) return SystemKind::Rational;
    return SystemKind::Polynomial;
}

RationalSystem parse_system(const std::string &text) {
    SystemAst ast = SystemParser(text).parse();

    RationalSystem sys;
    sys.name = ast.name;
    sys.table = make_table();
    for (auto &[name, value] : ast.states) {
        if (sys.table->find(name) >= 0) throw UndefinedSymbol("duplicate name: " + name);
        sys.state_vars.push_back(sys.table->add(name, VarRole::State));
        sys.x0.push_back(value);
    }
    for (auto &[name, value] : ast.params) {
        if (sys.table->find(name) >= 0) throw UndefinedSymbol("duplicate name: " + name);
        sys.param_vars.push_back(sys.table->add(name, VarRole::Parameter));
        sys.param_values.push_back(value);
    }
    if (sys.state_vars.empty()) throw DimensionMismatch("no states declared");
    if (ast.outputs.empty()) throw DimensionMismatch("no outputs declared");

    sys.f.resize(sys.state_vars.size());
    std::vector<bool> have(sys.state_vars.size(), false);
    for (auto &[name, expr] : ast.dynamics) {
        int v = sys.table->find(name);
        if (v < 0 || sys.table->role(v) != VarRole::State)
            throw UndefinedSymbol("d-equation for unknown state " + name);
        size_t idx = std::find(sys.state_vars.begin(), sys.state_vars.end(), v) -
                     sys.state_vars.begin();
        if (have[idx]) throw DimensionMismatch("state " + name + " has two d-equations");
        sys.f[idx] = resolve(*expr, sys);
        have[idx] = true;
    }
    for (size_t i = 0; i < have.size(); ++i)
        if (!have[i])
            throw DimensionMismatch("state " + sys.table->name(sys.state_vars[i]) +
                                    " lacks a d-equation");

    for (auto &[name, expr] : ast.outputs) {
        sys.output_names.push_back(name);
        sys.h.push_back(resolve(*expr, sys));
    }
    for (auto &expr : ast.assumptions) {
        RationalFunction g = resolve(*expr, sys);
        if (g.num().is_constant()) {
            // bound parameters may fold an assumption to a constant
            if (g.is_zero()) throw Error("assume clause is identically zero");
            continue;
        }
        sys.assumptions.push_back(g.num().integer_primitive());
    }

    std::vector<RationalFunction> all = sys.f;
    all.insert(all.end(), sys.h.begin(), sys.h.end());
    sys.kind = kind_of(all);

    // every component must be defined at x0
    Bindings at_x0;
    for (size_t i = 0; i < sys.state_vars.size(); ++i)
        at_x0[sys.state_vars[i]] = RationalFunction::constant(sys.table, sys.x0[i]);
    for (auto &g : all) {
        RationalFunction den_val = substitute(Polynomial(g.den()), at_x0);
        if (den_val.is_zero())
            throw DenominatorZeroAtX0(g.str());
    }
    return sys;
}

std::string render_system(const RationalSystem &sys) {
    std::ostringstream os;
    os << "system " << sys.name << " {\n";
    if (!sys.param_vars.empty()) {
        os << "  params";
        for (size_t i = 0; i < sys.param_vars.size(); ++i) {
            os << " " << sys.table->name(sys.param_vars[i]);
            if (sys.param_values[i]) os << " = " << to_string(*sys.param_values[i]);
        }
        os << ";\n";
    }
    os << "  states";
    for (size_t i = 0; i < sys.state_vars.size(); ++i)
        os << " " << sys.table->name(sys.state_vars[i]) << " = " << to_string(sys.x0[i]);
    os << ";\n";
    for (size_t i = 0; i < sys.f.size(); ++i)
        os << "  d " << sys.table->name(sys.state_vars[i]) << " = " << sys.f[i].str() << ";\n";
    for (size_t i = 0; i < sys.h.size(); ++i)
        os << "  output " << sys.output_names[i] << " = " << sys.h[i].str() << ";\n";
    for (auto &a : sys.assumptions) os << "  assume " << a.str() << " != 0;\n";
    os << "}\n";
    return os.str();
}

RationalFunction parse_expression(const std::string &text, const VarTablePtr &table) {
    Lexer lex(text);
    ExprPtr ast = ExprParser(lex).parse();
    Token end = lex.next();
    if (end.kind != Tok::End)
        throw SyntaxError(end.line, end.col, "trailing input after expression");

    // resolve against the table with no parameter folding
    struct Resolver {
        const VarTablePtr &table;
        RationalFunction operator()(const ExprAst &e) const {
            switch (e.op) {
            case ExprAst::Op::Const:
                return RationalFunction::constant(table, e.value);
            case ExprAst::Op::Var: {
                int v = table->find(e.name);
                if (v < 0) throw UndefinedSymbol(e.name);
                return RationalFunction::variable(table, v);
            }
            case ExprAst::Op::Neg:
                return -(*this)(*e.lhs);
            case ExprAst::Op::Add:
                return (*this)(*e.lhs) + (*this)(*e.rhs);
            case ExprAst::Op::Sub:
                return (*this)(*e.lhs) - (*this)(*e.rhs);
            case ExprAst::Op::Mul:
                return (*this)(*e.lhs) * (*this)(*e.rhs);
            case ExprAst::Op::Div:
                return (*this)(*e.lhs) / (*this)(*e.rhs);
            case ExprAst::Op::Pow:
                return (*this)(*e.lhs).pow(e.exponent);
            }
            throw Error("unreachable expression node");
        }
    };
    return Resolver{table}(*ast);
}

bool structurally_equal(const RationalSystem &a, const RationalSystem &b) {
    if (a.name != b.name || a.n() != b.n() || a.m_y() != b.m_y()) return false;
    if (a.kind != b.kind || a.x0 != b.x0 || a.param_values != b.param_values) return false;
    if (a.output_names != b.output_names) return false;
    auto names = [](const RationalSystem &s, const std::vector<int> &vars) {
        std::vector<std::string> out;
        for (int v : vars) out.push_back(s.table->name(v));
        return out;
    };
    if (names(a, a.state_vars) != names(b, b.state_vars)) return false;
    if (names(a, a.param_vars) != names(b, b.param_vars)) return false;
    // tables are canonical (states then params, declaration order), so term
    // maps can be compared directly
    auto same = [](const RationalFunction &x, const RationalFunction &y) {
        return x.num() == y.num() && x.den() == y.den();
    };
    for (int i = 0; i < a.n(); ++i)
        if (!same(a.f[i], b.f[i])) return false;
    for (int i = 0; i < a.m_y(); ++i)
        if (!same(a.h[i], b.h[i])) return false;
    if (a.assumptions.size() != b.assumptions.size()) return false;
    for (size_t i = 0; i < a.assumptions.size(); ++i)
        if (!(a.assumptions[i] == b.assumptions[i])) return false;
    return true;
}

} // namespace ratobs
