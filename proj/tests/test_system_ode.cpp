#include "oracles.hpp"

#include "entrobound/error.hpp"
#include "entrobound/measures.hpp"
#include "entrobound/ode.hpp"
#include "entrobound/system.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

using namespace entrobound;

namespace {

System make(std::vector<std::string> f, std::vector<double> lo, std::vector<double> hi, double t0 = 0.0,
            std::optional<Partition> p = std::nullopt, std::vector<double> breaks = {})
{
    return build_system(f, std::move(breaks), std::move(p), BoxSet(std::move(lo), std::move(hi)), t0);
}

double at_end(const Trajectory& tr, int i = 0)
{
    return tr.state(tr.size() - 1)[static_cast<std::size_t>(i)];
}

}  // namespace

TEST_CASE("build_system examples")
{
    const auto scalar = make({"1.7320508*x1"}, {2}, {3});
    CHECK(scalar.dimension() == 1);
    CHECK(scalar.partition().blocks() == 1);
    const auto osc = make({"x2", "-x1"}, {-1, -1}, {1, 1}, 0.0, Partition::scalar(2));
    CHECK(osc.partition().blocks() == 2);
    CHECK_THROWS_AS((void)make({"x1", "x3"}, {0, 0}, {1, 1}), ParseError);
    CHECK_THROWS((void)make({"x1"}, {1}, {1}));
    CHECK_THROWS((void)make({"x1", "x2"}, {0, 0}, {1, 1}, 0.0, Partition({3}, {Norm::Inf}, Norm::Inf)));
}

TEST_CASE("jacobian examples")
{
    const auto scalar = make({"1.7320508*x1"}, {2}, {3});
    const std::vector<double> x1{2.5};
    CHECK(jacobian(scalar, 4.0, x1)(0, 0) == 1.7320508);

    const auto ltv = make({"sin(t)*x1 + cos(t)*x2", "sin(t)*x1 + cos(t)*x2"}, {-1, -1}, {1, 1});
    const std::vector<double> x2{0.3, 0.4};
    Matrix expect(2, 2);
    expect << 0, 1, 0, 1;
    CHECK((jacobian(ltv, 0.0, x2) - expect).norm() == 0.0);

    const auto osc = make({"x2", "-x1"}, {-1, -1}, {1, 1}, 0.0, Partition::scalar(2));
    expect << 0, 1, -1, 0;
    CHECK((jacobian(osc, 0.0, x2) - expect).norm() == 0.0);
    CHECK(jacobian_block(osc, 0, 1, 0.0, x2)(0, 0) == 1.0);
    CHECK_THROWS((void)jacobian_block(osc, 2, 0, 0.0, x2));
}

TEST_CASE("block assembly reproduces the Jacobian bit-exactly")
{
    const auto sys = make({"x1*x2 + sin(x3)", "exp(-x1) - x2^2", "x3*x1 + t", "tanh(x4 - x2)"}, {-1, -1, -1, -1},
                          {1, 1, 1, 1}, 0.0, Partition({1, 2, 1}, {Norm::Inf, Norm::Two, Norm::One}, Norm::Inf));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 50; ++k) {
        const std::vector<double> x{u(rng), u(rng), u(rng), u(rng)};
        const double t = u(rng);
        const Matrix j = jacobian(sys, t, x);
        Matrix assembled(4, 4);
        const auto& p = sys.partition();
        for (int bi = 0; bi < p.blocks(); ++bi)
            for (int bj = 0; bj < p.blocks(); ++bj)
                assembled.block(p.offset(bi), p.offset(bj), p.size(bi), p.size(bj)) =
                    jacobian_block(sys, bi, bj, t, x);
        CHECK(std::memcmp(j.data(), assembled.data(), sizeof(double) * 16) == 0);
    }
}

TEST_CASE("decoupled blocks have zero off-diagonal blocks")
{
    const auto sys = make({"-x1", "x2^2", "x3"}, {0, 0, 0}, {1, 1, 1}, 0.0, Partition::scalar(3));
    const std::vector<double> x{0.2, 0.3, 0.4};
    CHECK(jacobian_block(sys, 0, 1, 0, x).norm() == 0.0);
    CHECK(jacobian_block(sys, 1, 1, 0, x)(0, 0) == doctest::Approx(0.6));
}

TEST_CASE("property: Jacobian matches central differences")
{
    const auto sys = make({"x1*x2 + sin(t*x1)", "exp(-x1^2) - x2^3/3"}, {-1, -1}, {1, 1});
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int k = 0; k < 100; ++k) {
        const std::vector<double> x{u(rng), u(rng)};
        const double t = u(rng);
        const Matrix j = jacobian(sys, t, x);
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                const double fd = oracle::central_difference(
                    [&](double v) {
                        auto y = x;
                        y[static_cast<std::size_t>(c)] = v;
                        std::vector<double> out(2);
                        sys.eval_field(t, y, out);
                        return out[static_cast<std::size_t>(r)];
                    },
                    x[static_cast<std::size_t>(c)]);
                CHECK(std::fabs(j(r, c) - fd) <= 1e-6 * (1.0 + std::fabs(j(r, c))));
            }
        }
    }
}

TEST_CASE("integrate examples")
{
    const auto sqrt3 = make({"1.7320508075688772*x1"}, {2}, {3});
    const std::vector<double> x0{2.0};
    const auto tr = integrate(sqrt3, x0, 1.0, 1e-3);
    CHECK(at_end(tr) == doctest::Approx(2.0 * std::exp(std::sqrt(3.0))).epsilon(1e-6));
    CHECK(tr.times.front() == 0.0);
    CHECK(tr.times.back() == 1.0);

    const auto still = make({"0"}, {0}, {1});
    const std::vector<double> five{5.0};
    const auto flat = integrate(still, five, 3.0, 0.1);
    for (std::size_t k = 0; k < flat.size(); ++k) CHECK(flat.state(k)[0] == 5.0);

    const auto blow = make({"x1^2"}, {1}, {2});
    const std::vector<double> two{2.0};
    CHECK_THROWS_AS((void)integrate(blow, two, 1.0, 1e-3), BlowUpError);
    try {
        (void)integrate(blow, two, 1.0, 1e-3);
    } catch (const BlowUpError& e) {
        CHECK(e.time() <= 0.5 + 1e-2);
        CHECK(e.initial_state() == two);
    }
}

TEST_CASE("property: RK4 converges at fourth order")
{
    const auto sys = make({"x2", "-sin(x1) + 0.3*cos(t)"}, {0, 0}, {1, 1});
    const std::vector<double> x0{1.0, 0.0};
    auto end = [&](double dt) {
        const auto tr = integrate(sys, x0, 2.0, dt);
        return Eigen::Vector2d(at_end(tr, 0), at_end(tr, 1));
    };
    const auto a = end(0.1), b = end(0.05), c = end(0.025);
    const double e1 = (a - b).norm(), e2 = (b - c).norm();
    // Successive differences shrink by 2^4 under step halving.
    CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.15));
    // Richardson: the error of b is about (a - b)/15.
    const auto ref = end(0.00625);
    CHECK((b - ref).norm() <= 16.0 * e1 / 15.0);
}

TEST_CASE("time grid contains every breakpoint exactly")
{
    const std::vector<double> breaks{0.123456789, 1.5};
    const auto grid = make_time_grid(0.0, 2.0, 0.1, breaks);
    for (double b : breaks) {
        const auto k = grid.index_of(b);
        CHECK(grid.times[k] == b);
        CHECK(grid.is_break[k]);
    }
    for (std::size_t k = 1; k < grid.size(); ++k) CHECK(grid.times[k] > grid.times[k - 1]);
    CHECK(grid.times.back() == 2.0);
}

TEST_CASE("breakpoints keep each step on one branch")
{
    // x' = 1 before t = 0.55 and 0 after; exact solution is min(t, 0.55).
    const auto sys = make({"pw(t < 0.55, 1, 0)"}, {0}, {1}, 0.0, std::nullopt, {0.55});
    const std::vector<double> x0{0.0};
    const auto tr = integrate(sys, x0, 1.0, 0.1);
    CHECK(at_end(tr) == doctest::Approx(0.55).epsilon(1e-12));
}

TEST_CASE("variational examples")
{
    Matrix a(2, 2);
    a << -0.5, 2.0, -1.0, 0.3;
    const auto lti = make({"-0.5*x1 + 2*x2", "-x1 + 0.3*x2"}, {-1, -1}, {1, 1});
    const std::vector<double> x0{0.4, -0.2};
    const auto v = variational(lti, x0, 3.0, 1e-3);
    const Matrix ref = matrix_exponential(3.0 * a);
    CHECK((v.phi.back() - ref).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(v.log_det.front() == 0.0);
    CHECK((v.phi.front() - Matrix::Identity(2, 2)).norm() == 0.0);

    const auto decay = make({"-x1"}, {0}, {1});
    const std::vector<double> one{1.0};
    const auto d = variational(decay, one, 1.0, 1e-3);
    CHECK(d.phi.back()(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("property: Liouville consistency")
{
    const std::vector<System> systems{
        make({"x2", "-x1 + (1 - x1^2)*x2"}, {-1, -1}, {1, 1}),
        make({"x1 - x1^3", "-x2 + x1*x2"}, {-1, -1}, {1, 1}),
        make({"sin(t)*x1 + cos(t)*x2", "sin(t)*x1 + cos(t)*x2"}, {-1, -1}, {1, 1}),
        make({"-x1 + x2*x3", "-x2", "0.2*x3 - x1^2"}, {-1, -1, -1}, {1, 1, 1}),
    };
    for (const auto& sys : systems) {
        const auto v = variational(sys, sys.initial_set().center(), 2.0, 1e-3);
        for (std::size_t k = 0; k < v.phi.size(); k += 50) {
            const double el = std::exp(v.log_det[k]);
            CHECK(std::fabs(v.phi[k].determinant() - el) <= 1e-6 * el);
        }
    }
}

TEST_CASE("ensemble initial states: corners, center, then interior")
{
    const BoxSet k({2.0}, {3.0});
    const auto s = ensemble_initial_states(k, 5, 1);
    REQUIRE(s.size() == 5);
    CHECK(s[0][0] == 2.0);
    CHECK(s[1][0] == 3.0);
    CHECK(s[2][0] == 2.5);
    for (std::size_t i = 3; i < 5; ++i) CHECK(k.contains(s[i]));
    const auto longer = ensemble_initial_states(k, 9, 1);
    for (std::size_t i = 0; i < 5; ++i) CHECK(longer[i] == s[i]);

    const BoxSet box({0.0, -1.0}, {1.0, 1.0});
    const auto b = ensemble_initial_states(box, 5, 3);
    CHECK(b[0] == std::vector<double>{0.0, -1.0});
    CHECK(b[3] == std::vector<double>{1.0, 1.0});
    CHECK(b[4] == std::vector<double>{0.5, 0.0});
}

TEST_CASE("ensembles are deterministic in the seed")
{
    const auto sys = make({"x2", "-x1 + (1 - x1^2)*x2"}, {-1, -1}, {1, 1});
    const auto a = sample_ensemble(sys, sys.initial_set(), 12, 2.0, 1e-2, 42);
    const auto b = sample_ensemble(sys, sys.initial_set(), 12, 2.0, 1e-2, 42);
    REQUIRE(a.members() == b.members());
    for (std::size_t m = 0; m < a.members(); ++m) CHECK(a.states[m] == b.states[m]);
    const auto c = convex_hull_samples(a, 50, 16, 9);
    const auto d = convex_hull_samples(b, 50, 16, 9);
    CHECK(c == d);
}

TEST_CASE("linear flow maps the initial hull onto the hull at time t")
{
    Matrix a(2, 2);
    a << 0.2, -1.0, 1.0, 0.2;
    const auto sys = make({"0.2*x1 - x2", "x1 + 0.2*x2"}, {-1, 0}, {1, 2});
    const auto ens = sample_ensemble(sys, sys.initial_set(), 10, 1.5, 1e-3, 5);
    const Matrix phi = matrix_exponential(1.5 * a);
    const std::size_t last = ens.grid.size() - 1;
    for (std::size_t m = 0; m < ens.members(); ++m) {
        const Eigen::Map<const Eigen::Vector2d> x0(ens.initial_states[m].data());
        const Eigen::Vector2d expect = phi * x0;
        const auto s = ens.state(m, last);
        CHECK(std::hypot(s[0] - expect(0), s[1] - expect(1)) <= 1e-9);
    }
}

TEST_CASE("convex hull samples")
{
    const auto sys = make({"x2", "-x1"}, {-1, -1}, {1, 1});
    const auto ens = sample_ensemble(sys, sys.initial_set(), 9, 1.0, 1e-2, 3);
    const auto plain = convex_hull_samples(ens, 20, 0, 1);
    REQUIRE(plain.size() == ens.members());
    for (std::size_t m = 0; m < ens.members(); ++m) {
        const auto s = ens.state(m, 20);
        CHECK(plain[m] == std::vector<double>(s.begin(), s.end()));
    }

    HullCombo mid;
    mid.count = 2;
    mid.member = {0, 3, 0, 0};
    mid.weight = {0.5, 0.5, 0, 0};
    std::vector<double> out(2);
    apply_combo(ens, 20, mid, out);
    const auto a = ens.state(0, 20), b = ens.state(3, 20);
    CHECK(out[0] == doctest::Approx(0.5 * (a[0] + b[0])));
    CHECK(out[1] == doctest::Approx(0.5 * (a[1] + b[1])));

    // Every sample lies in the hull of the member states.
    for (std::size_t k : {std::size_t{0}, std::size_t{40}, ens.grid.size() - 1}) {
        std::vector<Eigen::Vector2d> pts;
        for (std::size_t m = 0; m < ens.members(); ++m) pts.emplace_back(ens.state(m, k)[0], ens.state(m, k)[1]);
        const auto hull = oracle::convex_hull(pts);
        for (const auto& s : convex_hull_samples(ens, k, 200, 11))
            CHECK(oracle::in_hull(hull, Eigen::Vector2d(s[0], s[1]), 1e-12));
    }
}
