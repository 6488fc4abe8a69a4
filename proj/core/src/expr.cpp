#include "entrobound/expr.hpp"

#include "entrobound/error.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <utility>

namespace entrobound {

// ---------------------------------------------------------------------------
// Construction and inspection

namespace {

Expr::Node make_node(NodeKind kind)
{
    Expr::Node n;
    n.kind = kind;
    return n;
}

}  // namespace

Expr Expr::constant(double value)
{
    auto n = make_node(NodeKind::Constant);
    n.value = value;
    return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::time()
{
    return state(0);
}

Expr Expr::state(int index)
{
    auto n = make_node(NodeKind::Variable);
    n.variable = index;
    return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::neg(Expr operand)
{
    auto n = make_node(NodeKind::Neg);
    n.children = {std::move(operand)};
    return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::binary(NodeKind kind, Expr lhs, Expr rhs)
{
    auto n = make_node(kind);
    n.children = {std::move(lhs), std::move(rhs)};
    return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::call(Function fn, std::vector<Expr> args)
{
    auto n = make_node(NodeKind::Call);
    n.function = fn;
    n.children = std::move(args);
    return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::compare(Relation rel, Expr lhs, Expr rhs)
{
    auto n = make_node(NodeKind::Compare);
    n.relation = rel;
    n.children = {std::move(lhs), std::move(rhs)};
    return Expr(std::make_shared<const Node>(std::move(n)));
}

Expr Expr::piecewise(Expr condition, Expr then_branch, Expr else_branch)
{
    auto n = make_node(NodeKind::Piecewise);
    n.children = {std::move(condition), std::move(then_branch), std::move(else_branch)};
    return Expr(std::make_shared<const Node>(std::move(n)));
}

NodeKind Expr::kind() const { return node_->kind; }
double Expr::value() const { return node_->value; }
int Expr::variable() const { return node_->variable; }
Function Expr::function() const { return node_->function; }
Relation Expr::relation() const { return node_->relation; }
std::span<const Expr> Expr::children() const { return node_->children; }

bool Expr::is_constant(double v) const
{
    return node_ && node_->kind == NodeKind::Constant && node_->value == v;
}

int Expr::max_state_index() const
{
    int best = node_->kind == NodeKind::Variable ? node_->variable : 0;
    for (const auto& c : node_->children) best = std::max(best, c.max_state_index());
    return best;
}

bool Expr::depends_on(int variable) const
{
    if (node_->kind == NodeKind::Variable) return node_->variable == variable;
    for (const auto& c : node_->children)
        if (c.depends_on(variable)) return true;
    return false;
}

bool operator==(const Expr& a, const Expr& b)
{
    if (a.node_ == b.node_) return true;
    if (!a.node_ || !b.node_) return false;
    const auto& x = *a.node_;
    const auto& y = *b.node_;
    if (x.kind != y.kind || x.children.size() != y.children.size()) return false;
    switch (x.kind) {
        case NodeKind::Constant:
            if (x.value != y.value) return false;
            break;
        case NodeKind::Variable:
            if (x.variable != y.variable) return false;
            break;
        case NodeKind::Call:
            if (x.function != y.function) return false;
            break;
        case NodeKind::Compare:
            if (x.relation != y.relation) return false;
            break;
        default:
            break;
    }
    for (std::size_t i = 0; i < x.children.size(); ++i)
        if (!(x.children[i] == y.children[i])) return false;
    return true;
}

std::string_view function_name(Function fn)
{
    switch (fn) {
        case Function::Sin: return "sin";
        case Function::Cos: return "cos";
        case Function::Tan: return "tan";
        case Function::Exp: return "exp";
        case Function::Log: return "log";
        case Function::Sqrt: return "sqrt";
        case Function::Tanh: return "tanh";
        case Function::Abs: return "abs";
        case Function::Sign: return "sign";
        case Function::Min: return "min";
        case Function::Max: return "max";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::optional<Function> lookup_function(std::string_view name)
{
    static constexpr Function all[] = {Function::Sin, Function::Cos,  Function::Tan,  Function::Exp,
                                       Function::Log, Function::Sqrt, Function::Tanh, Function::Abs,
                                       Function::Sign, Function::Min, Function::Max};
    for (auto fn : all)
        if (function_name(fn) == name) return fn;
    return std::nullopt;
}

std::size_t arity(Function fn)
{
    return (fn == Function::Min || fn == Function::Max) ? 2 : 1;
}

class Parser {
public:
    Parser(std::string_view text, int dimension) : text_(text), dimension_(dimension) {}

    Expr parse()
    {
        auto e = expr();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, pos_); }

    void skip_space()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    char peek()
    {
        skip_space();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    bool accept(char c)
    {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c)) {
            if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' but reached end of input");
            fail(std::string("expected '") + c + "'");
        }
    }

    static bool is_number_start(char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '.'; }

    Expr expr()
    {
        auto lhs = term();
        for (;;) {
            if (accept('+')) lhs = Expr::binary(NodeKind::Add, lhs, term());
            else if (accept('-')) lhs = Expr::binary(NodeKind::Sub, lhs, term());
            else return lhs;
        }
    }

    Expr term()
    {
        auto lhs = unary();
        for (;;) {
            if (accept('*')) lhs = Expr::binary(NodeKind::Mul, lhs, unary());
            else if (accept('/')) lhs = Expr::binary(NodeKind::Div, lhs, unary());
            else return lhs;
        }
    }

    Expr unary()
    {
        if (!accept('-')) return power();
        // A bare literal directly after '-' is a negative constant, unless it
        // is the base of a power: -2^2 is -(2^2).
        if (is_number_start(peek())) {
            const auto save = pos_;
            const double v = number();
            if (peek() != '^') return Expr::constant(-v);
            pos_ = save;
        }
        return Expr::neg(unary());
    }

    Expr power()
    {
        auto base = primary();
        if (accept('^')) return Expr::binary(NodeKind::Pow, base, unary());
        return base;
    }

    double number()
    {
        skip_space();
        const auto start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }
        if (pos_ == start || (pos_ == start + 1 && text_[start] == '.')) {
            pos_ = start;
            fail("malformed number");
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            auto p = pos_ + 1;
            if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
            const auto digits = p;
            while (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) ++p;
            if (p == digits) {
                pos_ = digits;
                fail("malformed exponent");
            }
            pos_ = p;
        }
        const std::string literal(text_.substr(start, pos_ - start));
        return std::strtod(literal.c_str(), nullptr);
    }

    Expr primary()
    {
        const char c = peek();
        if (c == '\0') fail("unexpected end of input");
        if (accept('(')) {
            auto e = expr();
            expect(')');
            return e;
        }
        if (is_number_start(c)) return Expr::constant(number());
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    Expr identifier()
    {
        const auto start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const auto name = text_.substr(start, pos_ - start);

        if (name == "t") return Expr::time();
        if (name.size() > 1 && name[0] == 'x' &&
            name.find_first_not_of("0123456789", 1) == std::string_view::npos) {
            const long index = std::strtol(std::string(name.substr(1)).c_str(), nullptr, 10);
            if (index < 1 || index > dimension_) {
                pos_ = start;
                fail("variable " + std::string(name) + " out of range (dimension " +
                     std::to_string(dimension_) + ")");
            }
            return Expr::state(static_cast<int>(index));
        }
        if (name == "pw") return piecewise(start);
        auto fn = lookup_function(name);
        if (!fn) {
            pos_ = start;
            fail("unknown identifier '" + std::string(name) + "'");
        }
        expect('(');
        std::vector<Expr> args{expr()};
        while (accept(',')) args.push_back(expr());
        expect(')');
        const auto want = arity(*fn);
        if (want == 1 && args.size() != 1) {
            pos_ = start;
            fail(std::string(name) + " takes one argument");
        }
        if (want == 2) {
            if (args.size() < 2) {
                pos_ = start;
                fail(std::string(name) + " takes at least two arguments");
            }
            auto acc = Expr::call(*fn, {args[0], args[1]});
            for (std::size_t i = 2; i < args.size(); ++i) acc = Expr::call(*fn, {acc, args[i]});
            return acc;
        }
        return Expr::call(*fn, std::move(args));
    }

    Expr piecewise(std::size_t start)
    {
        expect('(');
        auto lhs = expr();
        Relation rel{};
        skip_space();
        if (accept('<')) rel = accept('=') ? Relation::LessEqual : Relation::Less;
        else if (accept('>')) rel = accept('=') ? Relation::GreaterEqual : Relation::Greater;
        else fail("pw condition needs one of <, <=, >, >=");
        auto cond = Expr::compare(rel, lhs, expr());
        expect(',');
        auto then_branch = expr();
        expect(',');
        auto else_branch = expr();
        if (!accept(')')) {
            pos_ = start;
            fail("pw takes exactly three arguments");
        }
        return Expr::piecewise(std::move(cond), std::move(then_branch), std::move(else_branch));
    }

    std::string_view text_;
    int dimension_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(std::string_view text, int dimension)
{
    return Parser(text, dimension).parse();
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

[[noreturn]] void domain_failure(std::string_view what)
{
    throw DomainError("non-finite value in " + std::string(what));
}

bool holds(Relation rel, double a, double b)
{
    switch (rel) {
        case Relation::Less: return a < b;
        case Relation::LessEqual: return a <= b;
        case Relation::Greater: return a > b;
        case Relation::GreaterEqual: return a >= b;
    }
    return false;
}

double apply(Function fn, double a, double b)
{
    switch (fn) {
        case Function::Sin: return std::sin(a);
        case Function::Cos: return std::cos(a);
        case Function::Tan: return std::tan(a);
        case Function::Exp: return std::exp(a);
        case Function::Log: return a < 0.0 ? std::nan("") : std::log(a);
        case Function::Sqrt: return a < 0.0 ? std::nan("") : std::sqrt(a);
        case Function::Tanh: return std::tanh(a);
        case Function::Abs: return std::fabs(a);
        case Function::Sign: return a < 0.0 ? -1.0 : 1.0;  // right limit at 0
        case Function::Min: return a < b ? a : b;
        case Function::Max: return a > b ? a : b;
    }
    return std::nan("");
}

double eval_node(const Expr& e, double t, std::span<const double> x);

bool eval_condition(const Expr& c, double t, std::span<const double> x)
{
    const auto kids = c.children();
    return holds(c.relation(), eval_node(kids[0], t, x), eval_node(kids[1], t, x));
}

double eval_node(const Expr& e, double t, std::span<const double> x)
{
    const auto kids = e.children();
    double r = 0.0;
    switch (e.kind()) {
        case NodeKind::Constant:
            return e.value();
        case NodeKind::Variable: {
            const int i = e.variable();
            if (i == 0) return t;
            if (static_cast<std::size_t>(i) > x.size())
                throw PreconditionError("x" + std::to_string(i) + " not bound (state has " +
                                        std::to_string(x.size()) + " entries)");
            return x[static_cast<std::size_t>(i - 1)];
        }
        case NodeKind::Neg:
            return -eval_node(kids[0], t, x);
        case NodeKind::Add:
            r = eval_node(kids[0], t, x) + eval_node(kids[1], t, x);
            if (!std::isfinite(r)) domain_failure("+");
            return r;
        case NodeKind::Sub:
            r = eval_node(kids[0], t, x) - eval_node(kids[1], t, x);
            if (!std::isfinite(r)) domain_failure("-");
            return r;
        case NodeKind::Mul:
            r = eval_node(kids[0], t, x) * eval_node(kids[1], t, x);
            if (!std::isfinite(r)) domain_failure("*");
            return r;
        case NodeKind::Div: {
            const double num = eval_node(kids[0], t, x);
            const double den = eval_node(kids[1], t, x);
            if (den == 0.0) throw DomainError("division by zero");
            r = num / den;
            if (!std::isfinite(r)) domain_failure("/");
            return r;
        }
        case NodeKind::Pow:
            r = std::pow(eval_node(kids[0], t, x), eval_node(kids[1], t, x));
            if (!std::isfinite(r)) domain_failure("^");
            return r;
        case NodeKind::Call: {
            const double a = eval_node(kids[0], t, x);
            const double b = kids.size() > 1 ? eval_node(kids[1], t, x) : 0.0;
            r = apply(e.function(), a, b);
            if (!std::isfinite(r)) domain_failure(function_name(e.function()));
            return r;
        }
        case NodeKind::Compare:
            return eval_condition(e, t, x) ? 1.0 : 0.0;
        case NodeKind::Piecewise:
            return eval_condition(kids[0], t, x) ? eval_node(kids[1], t, x) : eval_node(kids[2], t, x);
    }
    return r;
}

}  // namespace

double evaluate(const Expr& e, double t, std::span<const double> x)
{
    return eval_node(e, t, x);
}

// ---------------------------------------------------------------------------
// Simplification

namespace {

bool is_power_of_two(double v)
{
    if (v == 0.0 || !std::isfinite(v)) return false;
    int exponent = 0;
    return std::fabs(std::frexp(v, &exponent)) == 0.5;
}

bool all_constant(std::span<const Expr> kids)
{
    for (const auto& k : kids)
        if (k.kind() != NodeKind::Constant) return false;
    return true;
}

// Folds a node whose operands are all constants; keeps the node when the
// result would be non-finite so that evaluation still reports the error.
Expr fold(const Expr& e)
{
    try {
        const double v = evaluate(e, 0.0, {});
        return Expr::constant(v);
    } catch (const Error&) {
        return e;
    }
}

Expr rewrite(const Expr& e);

Expr rewrite_mul(const Expr& a, const Expr& b)
{
    if (a.kind() == NodeKind::Constant && b.kind() == NodeKind::Constant)
        return fold(Expr::binary(NodeKind::Mul, a, b));
    if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
    if (a.is_constant(1.0)) return b;
    if (b.is_constant(1.0)) return a;
    if (a.is_constant(-1.0)) return rewrite(Expr::neg(b));
    if (b.is_constant(-1.0)) return rewrite(Expr::neg(a));
    if (b.kind() == NodeKind::Constant) return rewrite_mul(b, a);
    // Pull power-of-two factors to the left; exact, so values are unchanged.
    if (b.kind() == NodeKind::Mul) {
        const auto inner = b.children();
        if (inner[0].kind() == NodeKind::Constant && is_power_of_two(inner[0].value())) {
            if (a.kind() == NodeKind::Constant) {
                if (is_power_of_two(a.value()) || is_power_of_two(inner[0].value()))
                    return rewrite_mul(fold(Expr::binary(NodeKind::Mul, a, inner[0])), inner[1]);
            } else {
                return Expr::binary(NodeKind::Mul, rewrite_mul(inner[0], a), inner[1]);
            }
        }
    }
    return Expr::binary(NodeKind::Mul, a, b);
}

Expr rewrite(const Expr& e)
{
    const auto kids = e.children();
    switch (e.kind()) {
        case NodeKind::Constant:
        case NodeKind::Variable:
        case NodeKind::Compare:
            return e;
        case NodeKind::Neg:
            if (kids[0].kind() == NodeKind::Constant) return Expr::constant(-kids[0].value());
            if (kids[0].kind() == NodeKind::Neg) return kids[0].children()[0];
            return e;
        case NodeKind::Add:
            if (all_constant(kids)) return fold(e);
            if (kids[0].is_constant(0.0)) return kids[1];
            if (kids[1].is_constant(0.0)) return kids[0];
            return e;
        case NodeKind::Sub:
            if (all_constant(kids)) return fold(e);
            if (kids[1].is_constant(0.0)) return kids[0];
            if (kids[0].is_constant(0.0)) return rewrite(Expr::neg(kids[1]));
            return e;
        case NodeKind::Mul:
            return rewrite_mul(kids[0], kids[1]);
        case NodeKind::Div:
            if (all_constant(kids)) return fold(e);
            if (kids[1].is_constant(1.0)) return kids[0];
            return e;
        case NodeKind::Pow:
            if (all_constant(kids)) return fold(e);
            if (kids[1].is_constant(1.0)) return kids[0];
            if (kids[1].is_constant(0.0)) return Expr::constant(1.0);
            return e;
        case NodeKind::Call:
            if (all_constant(kids)) return fold(e);
            return e;
        case NodeKind::Piecewise: {
            const auto cond = kids[0].children();
            if (all_constant(cond))
                return evaluate(kids[0], 0.0, {}) != 0.0 ? kids[1] : kids[2];
            if (kids[1] == kids[2]) return kids[1];
            return e;
        }
    }
    return e;
}

Expr rebuild(const Expr& e, std::vector<Expr> kids)
{
    switch (e.kind()) {
        case NodeKind::Neg: return Expr::neg(std::move(kids[0]));
        case NodeKind::Add:
        case NodeKind::Sub:
        case NodeKind::Mul:
        case NodeKind::Div:
        case NodeKind::Pow: return Expr::binary(e.kind(), std::move(kids[0]), std::move(kids[1]));
        case NodeKind::Call: return Expr::call(e.function(), std::move(kids));
        case NodeKind::Compare: return Expr::compare(e.relation(), std::move(kids[0]), std::move(kids[1]));
        case NodeKind::Piecewise:
            return Expr::piecewise(std::move(kids[0]), std::move(kids[1]), std::move(kids[2]));
        default: return e;
    }
}

Expr simplify_once(const Expr& e)
{
    if (e.children().empty()) return e;
    std::vector<Expr> kids;
    kids.reserve(e.children().size());
    for (const auto& k : e.children()) kids.push_back(simplify_once(k));
    return rewrite(rebuild(e, std::move(kids)));
}

}  // namespace

Expr simplify(const Expr& e)
{
    auto current = simplify_once(e);
    for (int pass = 0; pass < 16; ++pass) {
        auto next = simplify_once(current);
        if (next == current) break;
        current = std::move(next);
    }
    return current;
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

Expr num(double v) { return Expr::constant(v); }
Expr add(Expr a, Expr b) { return Expr::binary(NodeKind::Add, std::move(a), std::move(b)); }
Expr sub(Expr a, Expr b) { return Expr::binary(NodeKind::Sub, std::move(a), std::move(b)); }
Expr mul(Expr a, Expr b) { return Expr::binary(NodeKind::Mul, std::move(a), std::move(b)); }
Expr div(Expr a, Expr b) { return Expr::binary(NodeKind::Div, std::move(a), std::move(b)); }
Expr pow(Expr a, Expr b) { return Expr::binary(NodeKind::Pow, std::move(a), std::move(b)); }
Expr fn(Function f, Expr a) { return Expr::call(f, {std::move(a)}); }

Expr derive(const Expr& e, int v)
{
    if (!e.depends_on(v)) return num(0.0);
    const auto k = e.children();
    switch (e.kind()) {
        case NodeKind::Constant:
            return num(0.0);
        case NodeKind::Variable:
            return num(e.variable() == v ? 1.0 : 0.0);
        case NodeKind::Neg:
            return Expr::neg(derive(k[0], v));
        case NodeKind::Add:
            return add(derive(k[0], v), derive(k[1], v));
        case NodeKind::Sub:
            return sub(derive(k[0], v), derive(k[1], v));
        case NodeKind::Mul:
            return add(mul(derive(k[0], v), k[1]), mul(k[0], derive(k[1], v)));
        case NodeKind::Div:
            return sub(div(derive(k[0], v), k[1]), div(mul(k[0], derive(k[1], v)), pow(k[1], num(2.0))));
        case NodeKind::Pow: {
            const auto& base = k[0];
            const auto& expo = k[1];
            if (!expo.depends_on(v)) {
                auto lowered = expo.kind() == NodeKind::Constant ? num(expo.value() - 1.0) : sub(expo, num(1.0));
                return mul(mul(expo, pow(base, lowered)), derive(base, v));
            }
            if (!base.depends_on(v)) return mul(mul(e, fn(Function::Log, base)), derive(expo, v));
            return mul(e, add(mul(derive(expo, v), fn(Function::Log, base)),
                              div(mul(expo, derive(base, v)), base)));
        }
        case NodeKind::Call: {
            const auto& u = k[0];
            switch (e.function()) {
                case Function::Sin: return mul(fn(Function::Cos, u), derive(u, v));
                case Function::Cos: return mul(Expr::neg(fn(Function::Sin, u)), derive(u, v));
                case Function::Tan: return div(derive(u, v), pow(fn(Function::Cos, u), num(2.0)));
                case Function::Exp: return mul(e, derive(u, v));
                case Function::Log: return div(derive(u, v), u);
                case Function::Sqrt: return div(derive(u, v), mul(num(2.0), e));
                case Function::Tanh: return mul(sub(num(1.0), pow(e, num(2.0))), derive(u, v));
                case Function::Abs: return mul(fn(Function::Sign, u), derive(u, v));
                case Function::Sign: return num(0.0);
                case Function::Min:
                    return Expr::piecewise(Expr::compare(Relation::Less, k[0], k[1]), derive(k[0], v),
                                           derive(k[1], v));
                case Function::Max:
                    return Expr::piecewise(Expr::compare(Relation::Greater, k[0], k[1]), derive(k[0], v),
                                           derive(k[1], v));
            }
            break;
        }
        case NodeKind::Compare:
            return num(0.0);
        case NodeKind::Piecewise:
            return Expr::piecewise(k[0], derive(k[1], v), derive(k[2], v));
    }
    return num(0.0);
}

}  // namespace

Expr differentiate(const Expr& e, int variable)
{
    if (variable < 0) throw PreconditionError("negative variable index");
    return simplify(derive(simplify(e), variable));
}

// ---------------------------------------------------------------------------
// Printing

namespace {

int precedence(const Expr& e)
{
    switch (e.kind()) {
        case NodeKind::Constant: return e.value() < 0.0 || std::signbit(e.value()) ? 3 : 5;
        case NodeKind::Add:
        case NodeKind::Sub: return 1;
        case NodeKind::Mul:
        case NodeKind::Div: return 2;
        case NodeKind::Neg: return 3;
        case NodeKind::Pow: return 4;
        case NodeKind::Compare: return 0;
        default: return 5;
    }
}

std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string wrap(const Expr& e, bool parens)
{
    auto s = to_string(e);
    return parens ? "(" + s + ")" : s;
}

std::string_view relation_text(Relation r)
{
    switch (r) {
        case Relation::Less: return " < ";
        case Relation::LessEqual: return " <= ";
        case Relation::Greater: return " > ";
        case Relation::GreaterEqual: return " >= ";
    }
    return " ? ";
}

}  // namespace

std::string to_string(const Expr& e)
{
    const auto k = e.children();
    switch (e.kind()) {
        case NodeKind::Constant:
            return format_number(e.value());
        case NodeKind::Variable:
            return e.variable() == 0 ? "t" : "x" + std::to_string(e.variable());
        case NodeKind::Neg: {
            const bool literal = k[0].kind() == NodeKind::Constant && precedence(k[0]) == 5;
            return "-" + wrap(k[0], literal || precedence(k[0]) < 3);
        }
        case NodeKind::Add:
        case NodeKind::Sub: {
            const char* op = e.kind() == NodeKind::Add ? " + " : " - ";
            return wrap(k[0], precedence(k[0]) < 1) + op + wrap(k[1], precedence(k[1]) <= 1);
        }
        case NodeKind::Mul:
        case NodeKind::Div: {
            const char* op = e.kind() == NodeKind::Mul ? "*" : "/";
            return wrap(k[0], precedence(k[0]) < 2) + op + wrap(k[1], precedence(k[1]) <= 2);
        }
        case NodeKind::Pow:
            return wrap(k[0], precedence(k[0]) <= 4) + "^" + wrap(k[1], precedence(k[1]) < 3);
        case NodeKind::Call: {
            std::string s(function_name(e.function()));
            s += "(";
            for (std::size_t i = 0; i < k.size(); ++i) {
                if (i) s += ", ";
                s += to_string(k[i]);
            }
            return s + ")";
        }
        case NodeKind::Compare:
            return to_string(k[0]) + std::string(relation_text(e.relation())) + to_string(k[1]);
        case NodeKind::Piecewise:
            return "pw(" + to_string(k[0]) + ", " + to_string(k[1]) + ", " + to_string(k[2]) + ")";
    }
    return "?";
}

}  // namespace entrobound
