#include "oracles.hpp"

#include "entrobound/error.hpp"
#include "entrobound/measures.hpp"
#include "entrobound/system.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace entrobound;

namespace {

constexpr Norm kNorms[] = {Norm::One, Norm::Two, Norm::Inf};

Matrix m2(double a, double b, double c, double d)
{
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 2.0)
{
    std::uniform_real_distribution<double> u(-scale, scale);
    Matrix a(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) a(i, j) = u(rng);
    return a;
}

Matrix random_metzler(std::mt19937_64& rng, int n)
{
    std::uniform_real_distribution<double> u(-2.0, 2.0), v(0.0, 1.5);
    std::bernoulli_distribution zero(0.3);
    Matrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = i == j ? u(rng) : (zero(rng) ? 0.0 : v(rng));
    return a;
}

}  // namespace

TEST_CASE("induced_norm examples")
{
    const Matrix a = m2(1, 0, 1, 0);
    CHECK(induced_norm(a, Norm::Inf) == 1.0);
    for (Norm p : kNorms) CHECK(induced_norm(Matrix::Identity(3, 3), p) == doctest::Approx(1.0));
    CHECK(induced_norm(m2(3, 4, 0, 0), Norm::Two) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(induced_norm(m2(3, 4, 0, 0), Norm::One) == 4.0);
}

TEST_CASE("mixed_norm examples")
{
    std::mt19937_64 rng(1);
    const Matrix a = random_matrix(rng, 3, 3);
    CHECK(mixed_norm(a, Norm::Inf, Norm::Inf) == doctest::Approx(induced_norm(a, Norm::Inf)));
    Matrix col(2, 1);
    col << 1, 1;
    CHECK(mixed_norm(col, Norm::Inf, Norm::Inf) == 1.0);
}

TEST_CASE("mixed_norm dominates brute-force unit-sphere sampling")
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (Norm out : kNorms) {
        for (Norm in : kNorms) {
            const Matrix a = random_matrix(rng, 2, 3);
            const double exact = mixed_norm(a, out, in);
            double sampled = 0.0;
            for (int s = 0; s < 10000; ++s) {
                Vector v(3);
                for (int j = 0; j < 3; ++j) v(j) = u(rng);
                // Include sign-vector vertices of the inf-ball now and then.
                if (s % 10 == 0)
                    for (int j = 0; j < 3; ++j) v(j) = v(j) < 0 ? -1.0 : 1.0;
                v /= vector_norm(v, in);
                sampled = std::max(sampled, vector_norm(a * v, out));
            }
            CHECK(exact + 1e-9 >= sampled);
            // Sampling comes close: within 5 percent.
            CHECK(sampled >= 0.95 * exact);
        }
    }
}

TEST_CASE("matrix_measure examples")
{
    CHECK(matrix_measure(m2(1, 0, 1, 0), Norm::Inf) == 1.0);
    CHECK(matrix_measure(m2(0, 1, 0, 1), Norm::Inf) == 1.0);
    for (Norm p : kNorms) {
        CHECK(matrix_measure(Matrix::Zero(3, 3), p) == doctest::Approx(0.0));
        CHECK(matrix_measure(Matrix::Identity(3, 3), p) == doctest::Approx(1.0));
    }
    const double s = std::sin(std::numbers::pi / 4), c = std::cos(std::numbers::pi / 4);
    const Matrix at = m2(1, 0, 1, 0) * s + m2(0, 1, 0, 1) * c;
    CHECK(matrix_measure(at, Norm::Inf) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(matrix_measure(m2(0, 1, -1, 0), Norm::Two) == doctest::Approx(0.0));
}

TEST_CASE("measure sandwich examples")
{
    CHECK(measure_sandwich_check(m2(1, 0, 0, -1), Norm::Inf));
    CHECK(measure_sandwich_check(m2(0, 1, -1, 0), Norm::Two));
}

TEST_CASE("property: sandwich on random matrices against the QR oracle")
{
    std::mt19937_64 rng(3);
    int violations = 0;
    for (int k = 0; k < 1000; ++k) {
        const Matrix a = random_matrix(rng, 4, 4);
        const auto ev = oracle::qr_eigenvalues(a);
        REQUIRE(ev.size() == 4);
        for (Norm p : kNorms) {
            const double up = matrix_measure(a, p), low = -matrix_measure(-a, p), nrm = induced_norm(a, p);
            for (const auto& z : ev)
                if (z.real() < low - 1e-9 || z.real() > up + 1e-9) ++violations;
            if (up > nrm + 1e-9) ++violations;
            if (!measure_sandwich_check(a, p)) ++violations;
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("property: subadditivity and positive homogeneity")
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> cdist(0.0, 5.0);
    int violations = 0;
    for (int k = 0; k < 1000; ++k) {
        const Matrix a = random_matrix(rng, 3, 3), b = random_matrix(rng, 3, 3);
        const double c = cdist(rng);
        for (Norm p : kNorms) {
            if (matrix_measure(a + b, p) > matrix_measure(a, p) + matrix_measure(b, p) + 1e-9) ++violations;
            if (std::fabs(matrix_measure(c * a, p) - c * matrix_measure(a, p)) > 1e-9 * (1 + c)) ++violations;
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("is_metzler examples")
{
    CHECK(is_metzler(m2(-5, 0, 2, 1)));
    CHECK_FALSE(is_metzler(m2(0, -1e-300, 0, 0)));
    CHECK(is_metzler(Matrix::Identity(4, 4)));
}

TEST_CASE("spectral_abscissa_metzler examples")
{
    CHECK(spectral_abscissa_metzler(m2(1, 1, 1, 1)) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(spectral_abscissa_metzler(m2(-3, 0, 0, 0.5)) == doctest::Approx(0.5));
    CHECK(spectral_abscissa_metzler(m2(0, 1, 1, 0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS((void)spectral_abscissa_metzler(m2(0, -1, 1, 0)), PreconditionError);
}

TEST_CASE("property: Metzler abscissa matches the QR oracle")
{
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> dim(1, 8);
    int violations = 0;
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const Matrix m = random_metzler(rng, dim(rng));
        const double fast = spectral_abscissa_metzler(m);
        const double ref = oracle::max_real_part(oracle::qr_eigenvalues(m));
        const double err = std::fabs(fast - ref);
        worst = std::max(worst, err);
        if (err > 1e-8 * (1.0 + std::fabs(ref))) ++violations;
    }
    CHECK(violations == 0);
    MESSAGE("worst abscissa error " << worst);
}

TEST_CASE("property: growth rate of the Metzler exponential")
{
    std::mt19937_64 rng(6);
    for (int k = 0; k < 50; ++k) {
        const Matrix m = random_metzler(rng, 4);
        const double rate = std::log(induced_norm(matrix_exponential(50.0 * m), Norm::Inf)) / 50.0;
        CHECK(std::fabs(rate - spectral_abscissa_metzler(m)) <= 0.05);
    }
}

TEST_CASE("matrix_exponential examples")
{
    CHECK((matrix_exponential(Matrix::Zero(3, 3)) - Matrix::Identity(3, 3)).norm() == 0.0);
    const Matrix d = matrix_exponential(m2(1, 0, 0, 2));
    CHECK(d(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));
    CHECK(d(1, 1) == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
    CHECK(d(0, 1) == 0.0);
    const Matrix n = matrix_exponential(m2(0, 1, 0, 0));
    CHECK((n - m2(1, 1, 0, 1)).norm() <= 1e-15);
    // Rotation generator.
    const Matrix r = matrix_exponential(m2(0, -1, 1, 0));
    CHECK((r - m2(std::cos(1.0), -std::sin(1.0), std::sin(1.0), std::cos(1.0))).norm() <= 1e-13);
}

TEST_CASE("property: exponential agrees with eigen-decomposition of symmetric matrices")
{
    std::mt19937_64 rng(7);
    for (int k = 0; k < 100; ++k) {
        Matrix a = random_matrix(rng, 4, 4);
        a = 0.5 * (a + a.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Matrix> es(a);
        const Matrix ref = es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
                           es.eigenvectors().transpose();
        CHECK((matrix_exponential(a) - ref).norm() <= 1e-12 * ref.norm());
    }
}

TEST_CASE("symmetric_eigenvalues ascending")
{
    const Vector ev = symmetric_eigenvalues(m2(2, 1, 1, 2));
    CHECK(ev(0) == doctest::Approx(1.0));
    CHECK(ev(1) == doctest::Approx(3.0));
}

TEST_CASE("interconnection matrix examples")
{
    const Partition scalar = Partition::scalar(2);
    Matrix j(3, 3);
    j << -1, 0, 0, 0, 2, 3, 0, -4, 1;
    const Partition blocks({1, 2}, {Norm::Inf, Norm::Inf}, Norm::Inf);
    const Matrix an = interconnection_matrix(j, blocks);
    CHECK(an(0, 0) == -1.0);
    CHECK(an(1, 1) == doctest::Approx(matrix_measure(j.block(1, 1, 2, 2), Norm::Inf)));
    CHECK(an(0, 1) == 0.0);
    CHECK(an(1, 0) == 0.0);

    // A1 sin t + A2 cos t at t = pi/2 seen as two scalar subsystems.
    const Matrix at = m2(1, 0, 1, 0);
    const Matrix a2 = interconnection_matrix(at, scalar);
    CHECK((a2 - m2(1, 0, 1, 0)).norm() == 0.0);

    const Matrix one = interconnection_matrix(j, Partition::single(3));
    REQUIRE(one.rows() == 1);
    CHECK(one(0, 0) == doctest::Approx(matrix_measure(j, Norm::Inf)));
}

TEST_CASE("property: block domination on random partitions")
{
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> blocks(1, 4), size(1, 3);
    int violations = 0;
    for (int k = 0; k < 500; ++k) {
        std::vector<int> sizes(static_cast<std::size_t>(blocks(rng)));
        int n = 0;
        for (auto& s : sizes) n += (s = size(rng));
        const Partition p(sizes, {Norm::Inf}, Norm::Inf);
        const Matrix a = random_matrix(rng, n, n);
        const double lhs = global_measure(a, p);
        const double rhs = matrix_measure(interconnection_matrix(a, p), Norm::Inf);
        if (lhs > rhs + 1e-9) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("global norm collapses to the inf-norm")
{
    const Partition p({2, 1}, {Norm::Inf}, Norm::Inf);
    Vector v(3);
    v << 0.5, -3, 2;
    CHECK(global_norm(v, p) == 3.0);
    const Partition other({2, 1}, {Norm::One}, Norm::Inf);
    CHECK_THROWS_AS((void)global_measure(Matrix::Identity(3, 3), other), PreconditionError);
}
