#pragma once

// Scalar expressions in t, x1..xn: parsing, evaluation, symbolic
// differentiation and light constant folding.
//
// Grammar (whitespace insensitive, identifiers case sensitive):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | 't' | 'x' digits | func '(' args ')' | '(' expr ')'
//
// Functions: sin cos tan exp log sqrt tanh abs sign min max, and
// pw(cond, then, else) where cond is `a < b`, `a <= b`, `a > b` or `a >= b`.
// pw evaluates only the selected branch.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace entrobound {

enum class NodeKind : std::uint8_t {
    Constant,
    Variable,  // index 0 is t, index i >= 1 is x_i
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Call,
    Compare,
    Piecewise,
};

enum class Function : std::uint8_t { Sin, Cos, Tan, Exp, Log, Sqrt, Tanh, Abs, Sign, Min, Max };

enum class Relation : std::uint8_t { Less, LessEqual, Greater, GreaterEqual };

/// Immutable expression tree. Copies share structure.
class Expr {
public:
    struct Node;

    Expr() = default;

    static Expr constant(double value);
    static Expr time();
    static Expr state(int index);
    static Expr neg(Expr operand);
    static Expr binary(NodeKind kind, Expr lhs, Expr rhs);
    static Expr call(Function fn, std::vector<Expr> args);
    static Expr compare(Relation rel, Expr lhs, Expr rhs);
    static Expr piecewise(Expr condition, Expr then_branch, Expr else_branch);

    [[nodiscard]] bool empty() const noexcept { return node_ == nullptr; }
    [[nodiscard]] NodeKind kind() const;
    [[nodiscard]] double value() const;        // Constant
    [[nodiscard]] int variable() const;        // Variable
    [[nodiscard]] Function function() const;   // Call
    [[nodiscard]] Relation relation() const;   // Compare
    [[nodiscard]] std::span<const Expr> children() const;

    [[nodiscard]] bool is_constant(double v) const;
    /// Largest state index referenced (0 when only t or constants).
    [[nodiscard]] int max_state_index() const;
    [[nodiscard]] bool depends_on(int variable) const;

    friend bool operator==(const Expr& a, const Expr& b);

private:
    explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

struct Expr::Node {
    NodeKind kind{};
    double value = 0.0;
    int variable = 0;
    Function function{};
    Relation relation{};
    std::vector<Expr> children;
};

/// Parses `text`. Variables x1..x{dimension} are accepted; anything else
/// raises ParseError with the byte offset of the offending token.
[[nodiscard]] Expr parse_expression(std::string_view text, int dimension);

/// Evaluates at (t, x). Raises DomainError when any intermediate is non-finite.
[[nodiscard]] double evaluate(const Expr& e, double t, std::span<const double> x);

/// Exact partial derivative with respect to `variable` (0 = t, i = x_i), simplified.
[[nodiscard]] Expr differentiate(const Expr& e, int variable);

/// Folds constants and removes 0/1 identities. Never changes the value at a
/// point where the input evaluates successfully.
[[nodiscard]] Expr simplify(const Expr& e);

/// Text form that parses back to a structurally equal tree.
[[nodiscard]] std::string to_string(const Expr& e);

[[nodiscard]] std::string_view function_name(Function fn);

}  // namespace entrobound
