#include "oracles.hpp"

#include "entrobound/error.hpp"
#include "entrobound/expr.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

using namespace entrobound;

namespace {

double eval_at(const std::string& text, int n, double t, std::vector<double> x)
{
    return evaluate(parse_expression(text, n), t, x);
}

// Random smooth expression over t, x1, x2 that is defined everywhere.
Expr random_expr(std::mt19937_64& rng, int depth)
{
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 11);
    std::uniform_real_distribution<double> c(-2.0, 2.0);
    switch (pick(rng)) {
        case 0: return Expr::constant(std::round(c(rng) * 4.0) / 4.0);
        case 1: return Expr::time();
        case 2: return Expr::state(1 + static_cast<int>(rng() % 2));
        case 3: return Expr::binary(NodeKind::Add, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 4: return Expr::binary(NodeKind::Sub, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 5: return Expr::binary(NodeKind::Mul, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
        case 6: {
            // u / (2 + v^2) never divides by zero.
            auto den = Expr::binary(NodeKind::Add, Expr::constant(2.0),
                                    Expr::binary(NodeKind::Pow, random_expr(rng, depth - 1), Expr::constant(2.0)));
            return Expr::binary(NodeKind::Div, random_expr(rng, depth - 1), den);
        }
        case 7: return Expr::call(Function::Sin, {random_expr(rng, depth - 1)});
        case 8: return Expr::call(Function::Cos, {random_expr(rng, depth - 1)});
        case 9: return Expr::call(Function::Tanh, {random_expr(rng, depth - 1)});
        case 10: return Expr::binary(NodeKind::Pow, random_expr(rng, depth - 1), Expr::constant(3.0));
        default: return Expr::neg(random_expr(rng, depth - 1));
    }
}

}  // namespace

TEST_CASE("parse: grammar examples")
{
    const auto e = parse_expression("sin(t)*x1 + cos(t)*x2", 2);
    CHECK(e.kind() == NodeKind::Add);
    const auto x = parse_expression("x1", 1);
    CHECK(x.kind() == NodeKind::Variable);
    CHECK(x.variable() == 1);
    CHECK_THROWS_AS((void)parse_expression("x3", 2), ParseError);
    CHECK_THROWS_AS((void)parse_expression("x0", 2), ParseError);
    CHECK_THROWS_AS((void)parse_expression("y + 1", 2), ParseError);
    CHECK_THROWS_AS((void)parse_expression("sin(x1", 1), ParseError);
}

TEST_CASE("parse: error offsets point at the offending token")
{
    try {
        (void)parse_expression("2*x1 + * 3", 1);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 7);
    }
    try {
        (void)parse_expression("x1 + x9", 2);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 5);
    }
}

TEST_CASE("parse: precedence and associativity")
{
    CHECK(eval_at("2^3^2", 0, 0, {}) == doctest::Approx(512.0));
    CHECK(eval_at("-2^2", 0, 0, {}) == doctest::Approx(-4.0));
    CHECK(eval_at("1 - 2 - 3", 0, 0, {}) == doctest::Approx(-4.0));
    CHECK(eval_at("8 / 4 / 2", 0, 0, {}) == doctest::Approx(1.0));
    CHECK(eval_at("2*3 + 4*5", 0, 0, {}) == doctest::Approx(26.0));
    CHECK(eval_at("1.5e2 + 2E-1", 0, 0, {}) == doctest::Approx(150.2));
    CHECK(eval_at("min(3, 1, 2) + max(1, 5, 2)", 0, 0, {}) == doctest::Approx(6.0));
}

TEST_CASE("evaluate: examples and domain errors")
{
    CHECK(eval_at("sin(t)*x1", 1, std::numbers::pi / 2, {3.0}) == doctest::Approx(3.0));
    CHECK(eval_at("2", 1, 17.0, {5.0}) == 2.0);
    CHECK_THROWS_AS((void)eval_at("sqrt(x1)", 1, 0, {-1.0}), DomainError);
    CHECK_THROWS_AS((void)eval_at("log(x1)", 1, 0, {-1.0}), DomainError);
    CHECK_THROWS_AS((void)eval_at("1/x1", 1, 0, {0.0}), DomainError);
    CHECK(eval_at("pw(t < 0, 1, 2)", 0, -1.0, {}) == 2.0 - 1.0);
    CHECK(eval_at("pw(t < 0, 1, 2)", 0, 0.0, {}) == 2.0);
    // Only the selected branch is evaluated.
    CHECK(eval_at("pw(x1 < 0, 0, sqrt(x1))", 1, 0, {-4.0}) == 0.0);
    CHECK(eval_at("abs(x1) + sign(x1)", 1, 0, {-3.0}) == 2.0);
    CHECK(eval_at("sign(x1)", 1, 0, {0.0}) == 1.0);
}

TEST_CASE("evaluate: deterministic")
{
    const auto e = parse_expression("sin(t)*x1 + exp(x2)/(1 + x1^2)", 2);
    const std::vector<double> x{0.3, -1.7};
    const double a = evaluate(e, 1.25, x);
    const double b = evaluate(e, 1.25, x);
    CHECK(std::memcmp(&a, &b, sizeof a) == 0);
}

TEST_CASE("differentiate: examples")
{
    const auto d1 = differentiate(parse_expression("sin(t)*x1", 1), 1);
    CHECK(to_string(d1) == "sin(t)");
    const auto d2 = differentiate(parse_expression("x1*x2^2", 2), 2);
    const std::vector<double> x{1.5, -2.0};
    CHECK(evaluate(d2, 0, x) == doctest::Approx(2 * 1.5 * -2.0));
    CHECK(simplify(d2) == simplify(parse_expression("2*x1*x2", 2)));
    const auto d3 = differentiate(parse_expression("7", 1), 1);
    CHECK(to_string(d3) == "0");
}

TEST_CASE("differentiate: kinks take the right-limit branch")
{
    const auto da = differentiate(parse_expression("abs(x1)", 1), 1);
    CHECK(evaluate(da, 0, std::vector<double>{0.0}) == 1.0);
    CHECK(evaluate(da, 0, std::vector<double>{-2.0}) == -1.0);
    const auto dm = differentiate(parse_expression("max(x1, 2*x1)", 1), 1);
    CHECK(evaluate(dm, 0, std::vector<double>{1.0}) == 2.0);
    CHECK(evaluate(dm, 0, std::vector<double>{-1.0}) == 1.0);
}

TEST_CASE("simplify: examples and idempotence")
{
    CHECK(to_string(simplify(parse_expression("0*x1 + 1*x2", 2))) == "x2");
    CHECK(to_string(simplify(parse_expression("2+3", 0))) == "5");
    CHECK(to_string(simplify(parse_expression("sin(t)", 0))) == "sin(t)");
    const auto s = simplify(parse_expression("(x1 + 0) * (1 * (2 + 2)) - 0", 1));
    CHECK(simplify(s) == s);
}

TEST_CASE("property: symbolic derivatives match central differences")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    int checked = 0;
    for (int k = 0; k < 200; ++k) {
        const Expr e = random_expr(rng, 4);
        const double t = u(rng);
        std::vector<double> x{u(rng), u(rng)};
        for (int var = 1; var <= 2; ++var) {
            const double exact = evaluate(differentiate(e, var), t, x);
            const double fd = oracle::central_difference(
                [&](double v) {
                    auto y = x;
                    y[static_cast<std::size_t>(var - 1)] = v;
                    return evaluate(e, t, y);
                },
                x[static_cast<std::size_t>(var - 1)]);
            CHECK(std::fabs(exact - fd) <= 1e-6 * (1.0 + std::fabs(fd)));
            ++checked;
        }
    }
    CHECK(checked == 400);
}

TEST_CASE("property: simplify preserves values within one ulp")
{
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 100; ++k) {
        const Expr e = random_expr(rng, 4);
        const Expr s = simplify(e);
        const double t = u(rng);
        const std::vector<double> x{u(rng), u(rng)};
        const double a = evaluate(e, t, x), b = evaluate(s, t, x);
        const double ulp = std::nextafter(std::fabs(a), INFINITY) - std::fabs(a);
        CHECK(std::fabs(a - b) <= ulp);
        CHECK(simplify(s) == s);
    }
}

TEST_CASE("property: print then parse round-trips")
{
    std::mt19937_64 rng(13);
    for (int k = 0; k < 200; ++k) {
        const Expr e = random_expr(rng, 5);
        const Expr back = parse_expression(to_string(e), 2);
        CHECK(back == e);
    }
    for (const char* text : {"-x1^2", "(-x1)^2", "x1 - (x2 - t)", "2^-1", "pw(t >= 1, x1, -x2)", "-3 * x1",
                             "min(x1, max(x2, t))", "x1 / (x2 * t)"}) {
        const Expr e = parse_expression(text, 2);
        CHECK(parse_expression(to_string(e), 2) == e);
    }
}
