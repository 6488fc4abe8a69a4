#include "entrobound/bounds.hpp"
#include "entrobound/empirical.hpp"
#include "entrobound/expr.hpp"
#include "entrobound/measures.hpp"
#include "entrobound/ode.hpp"
#include "entrobound/system.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace entrobound;

namespace {

System van_der_pol()
{
    return build_system({"x2", "-x1 + (1 - x1^2)*x2"}, {}, std::nullopt, BoxSet({-1, -1}, {1, 1}), 0.0);
}

Matrix random_matrix(int n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix a(n, n);
    for (int i = 0; i < n * n; ++i) a.data()[i] = u(rng);
    return a;
}

void BM_ExprEvaluate(benchmark::State& state)
{
    const auto e = parse_expression("sin(t)*x1 + exp(-x2^2)/(1 + x1^2) - tanh(x1*x2)", 2);
    const std::vector<double> x{0.3, -0.7};
    double t = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(evaluate(e, t, x));
        t += 1e-6;
    }
}
BENCHMARK(BM_ExprEvaluate);

void BM_Differentiate(benchmark::State& state)
{
    const auto e = parse_expression("sin(t)*x1 + exp(-x2^2)/(1 + x1^2) - tanh(x1*x2)", 2);
    for (auto _ : state) benchmark::DoNotOptimize(differentiate(e, 1));
}
BENCHMARK(BM_Differentiate);

void BM_Rk4Trajectory(benchmark::State& state)
{
    const auto sys = van_der_pol();
    const std::vector<double> x0{0.5, 0.0};
    for (auto _ : state) benchmark::DoNotOptimize(integrate(sys, x0, 10.0, 1e-3));
}
BENCHMARK(BM_Rk4Trajectory)->Unit(benchmark::kMillisecond);

void BM_MatrixMeasure(benchmark::State& state)
{
    const auto p = static_cast<Norm>(state.range(0));
    const Matrix a = random_matrix(6, 1);
    for (auto _ : state) benchmark::DoNotOptimize(matrix_measure(a, p));
}
BENCHMARK(BM_MatrixMeasure)->Arg(0)->Arg(1)->Arg(2);

void BM_MatrixExponential(benchmark::State& state)
{
    const Matrix a = random_matrix(static_cast<int>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(matrix_exponential(a));
}
BENCHMARK(BM_MatrixExponential)->Arg(2)->Arg(4)->Arg(8);

void BM_MetzlerAbscissa(benchmark::State& state)
{
    Matrix m = random_matrix(static_cast<int>(state.range(0)), 3).cwiseAbs();
    m.diagonal() *= -1.0;
    for (auto _ : state) benchmark::DoNotOptimize(spectral_abscissa_metzler(m));
}
BENCHMARK(BM_MetzlerAbscissa)->Arg(4)->Arg(16);

void BM_MeasureBound(benchmark::State& state)
{
    const auto sys = van_der_pol();
    HorizonConfig cfg;
    cfg.t_max = 10.0;
    cfg.dt = 1e-2;
    for (auto _ : state) benchmark::DoNotOptimize(upper_bound_measure(sys, sys.initial_set(), Norm::Inf, cfg));
}
BENCHMARK(BM_MeasureBound)->Unit(benchmark::kMillisecond);

void BM_EmpiricalScalar(benchmark::State& state)
{
    const auto sys = build_system({"x1"}, {}, std::nullopt, BoxSet({0}, {1}), 0.0);
    EmpiricalConfig cfg;
    cfg.eps = {0.1, 0.05, 0.02};
    cfg.horizons = {2.0, 3.0, 4.0};
    for (auto _ : state) benchmark::DoNotOptimize(estimate_entropy(sys, sys.initial_set(), 0.0, cfg, 1e-2));
}
BENCHMARK(BM_EmpiricalScalar)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
