#include "entrobound/verify.hpp"

#include "entrobound/error.hpp"
#include "entrobound/measures.hpp"
#include "entrobound/ode.hpp"
#include "entrobound/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace entrobound {

void CheckResult::record(double lhs, double rhs, double slack)
{
    ++checks;
    const double scale = 1.0 + std::fabs(rhs);
    if (lhs > rhs + slack * scale) ++violations;
    worst = std::max(worst, (lhs - rhs) / scale);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kSegmentPoints = 9;  // theta = 0, 1/8, ..., 1

std::vector<double> uniform_point(const BoxSet& k, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> p(static_cast<std::size_t>(k.dimension()));
    for (int i = 0; i < k.dimension(); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        p[ui] = k.lower()[ui] + u(rng) * (k.upper()[ui] - k.lower()[ui]);
    }
    return p;
}

Vector block_magnitudes(const Partition& part, std::span<const double> a, std::span<const double> b)
{
    Vector out(part.blocks());
    for (int i = 0; i < part.blocks(); ++i) {
        Vector d(part.size(i));
        for (int r = 0; r < part.size(i); ++r) {
            const auto idx = static_cast<std::size_t>(part.offset(i) + r);
            d(r) = a[idx] - b[idx];
        }
        out(i) = vector_norm(d, part.local(i));
    }
    return out;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

// Per-time extremes over a set of states: entrywise max of A_N, max mu_inf(J)
// and min -mu_inf(-J).
struct Extremes {
    Matrix a;
    double mu_max = -kInf;
    double mu_min = kInf;

    void add(const System& sys, double t, std::span<const double> x)
    {
        const Matrix j = jacobian(sys, t, x);
        const Matrix an = interconnection_matrix(j, sys.partition());
        if (a.size() == 0)
            a = an;
        else
            a = a.cwiseMax(an);
        mu_max = std::max(mu_max, matrix_measure(j, Norm::Inf));
        mu_min = std::min(mu_min, -matrix_measure(-j, Norm::Inf));
    }
    void merge(const Extremes& o)
    {
        a = a.size() == 0 ? o.a : a.cwiseMax(o.a);
        mu_max = std::max(mu_max, o.mu_max);
        mu_min = std::min(mu_min, o.mu_min);
    }
};

bool jacobian_is_constant(const System& sys)
{
    for (int i = 0; i < sys.dimension(); ++i)
        for (int j = 0; j < sys.dimension(); ++j)
            for (int v = 0; v <= sys.dimension(); ++v)
                if (sys.jacobian_entry(i, j).depends_on(v)) return false;
    return true;
}

}  // namespace

SeparationReport verify_separation_bounds(const System& sys, const BoxSet& k, double t0, double horizon, int pairs,
                                          const HorizonConfig& hcfg, double slack)
{
    if (!(horizon > 0.0)) throw PreconditionError("separation check needs T > 0");
    if (pairs <= 0) throw PreconditionError("separation check needs at least one pair");
    const System local = sys.with_initial(k, t0);
    const auto ens = sample_ensemble(local, k, hcfg.ensemble, t0 + horizon, hcfg.dt, hcfg.seed);
    const auto& grid = ens.grid;
    const std::size_t nodes = grid.size();
    const auto n = static_cast<std::size_t>(local.dimension());
    const Partition& part = local.partition();

    std::vector<Extremes> shared(nodes);
    parallel_for(nodes, [&](std::size_t t) {
        for (const auto& p : convex_hull_samples(ens, t, hcfg.combos, hcfg.seed)) shared[t].add(local, grid.times[t], p);
    });

    std::mt19937_64 rng(hcfg.seed ^ 0x5e9a7a7e5ull);
    std::vector<std::vector<double>> xs, ys;
    for (int p = 0; p < pairs; ++p) {
        xs.push_back(uniform_point(k, rng));
        ys.push_back(uniform_point(k, rng));
    }

    const std::size_t stride = std::max<std::size_t>(1, nodes / 200);
    std::vector<SeparationReport> per(static_cast<std::size_t>(pairs));
    parallel_for(static_cast<std::size_t>(pairs), [&](std::size_t p) {
        auto& rep = per[p];
        const auto tx = integrate_on_grid(local, grid, 0, xs[p], xs[p]);
        const auto ty = integrate_on_grid(local, grid, 0, ys[p], ys[p]);
        const Vector delta_n = block_magnitudes(part, ys[p], xs[p]);
        const double delta = max_abs_diff(xs[p], ys[p]);
        Matrix running;
        double eta = 0.0, eta_low = 0.0, prev_max = 0.0, prev_min = 0.0;
        std::vector<double> z(n);
        for (std::size_t t = 0; t < nodes; ++t) {
            const std::span<const double> a(tx.data() + t * n, n), b(ty.data() + t * n, n);
            Extremes e = shared[t];
            for (int s = 0; s < kSegmentPoints; ++s) {
                const double th = static_cast<double>(s) / (kSegmentPoints - 1);
                for (std::size_t i = 0; i < n; ++i) z[i] = a[i] + th * (b[i] - a[i]);
                e.add(local, grid.times[t], z);
            }
            running = t == 0 ? e.a : running.cwiseMax(e.a);
            if (t > 0) {
                const double h = grid.times[t] - grid.times[t - 1];
                eta += 0.5 * h * (prev_max + e.mu_max);
                eta_low += 0.5 * h * (prev_min + e.mu_min);
            }
            prev_max = e.mu_max;
            prev_min = e.mu_min;
            if (t % stride != 0 && t + 1 != nodes) continue;
            const double el = grid.times[t] - t0;
            const Vector rhs = matrix_exponential(running * el) * delta_n;
            const Vector lhs = block_magnitudes(part, b, a);
            for (int i = 0; i < part.blocks(); ++i) rep.componentwise.record(lhs(i), rhs(i), slack);
            const double sep = max_abs_diff(a, b);
            rep.coppel_upper.record(sep, std::exp(eta) * delta, slack);
            rep.coppel_lower.record(std::exp(eta_low) * delta, sep, slack);
        }
    });

    SeparationReport out;
    for (const auto& r : per) {
        for (auto [dst, src] : {std::pair{&out.componentwise, &r.componentwise},
                                std::pair{&out.coppel_upper, &r.coppel_upper},
                                std::pair{&out.coppel_lower, &r.coppel_lower}}) {
            dst->checks += src->checks;
            dst->violations += src->violations;
            dst->worst = std::max(dst->worst, src->worst);
        }
    }
    return out;
}

VolumeReport verify_volume_bound(const System& sys, const BoxSet& k, double t0, double horizon, int mc_samples,
                                 const HorizonConfig& hcfg, double slack)
{
    const int n = sys.dimension();
    if (n > 3) throw PreconditionError("volume check supports n <= 3");
    if (!(horizon > 0.0)) throw PreconditionError("volume check needs T > 0");
    if (mc_samples < 100) throw PreconditionError("volume check needs at least 100 samples");
    const System local = sys.with_initial(k, t0);
    const double t_end = t0 + horizon;
    const auto ens = sample_ensemble(local, k, hcfg.ensemble, t_end, hcfg.dt, hcfg.seed);
    const auto& grid = ens.grid;
    const std::size_t nodes = grid.size();
    const auto un = static_cast<std::size_t>(n);

    VolumeReport rep;
    rep.volume_k = k.volume();

    // gamma: integral of the smallest trace over hull samples.
    std::vector<double> tr_min(nodes, kInf);
    parallel_for(nodes, [&](std::size_t t) {
        for (const auto& p : convex_hull_samples(ens, t, hcfg.combos, hcfg.seed))
            tr_min[t] = std::min(tr_min[t], jacobian(local, grid.times[t], p).trace());
    });
    for (std::size_t t = 1; t < nodes; ++t)
        rep.gamma += 0.5 * (grid.times[t] - grid.times[t - 1]) * (tr_min[t - 1] + tr_min[t]);
    rep.bound = std::exp(rep.gamma) * rep.volume_k;

    // Bounding box of the image: ensemble members plus points on the faces of K.
    std::vector<std::vector<double>> probes = ens.initial_states;
    const int per_axis = n == 1 ? 2 : (n == 2 ? 33 : 9);
    for (int axis = 0; axis < n; ++axis) {
        for (int side = 0; side < 2; ++side) {
            int total = 1;
            for (int i = 0; i < n - 1; ++i) total *= per_axis;
            for (int idx = 0; idx < total; ++idx) {
                std::vector<double> p(un);
                int rest = idx;
                for (int i = 0; i < n; ++i) {
                    const auto ui = static_cast<std::size_t>(i);
                    if (i == axis) {
                        p[ui] = side == 0 ? k.lower()[ui] : k.upper()[ui];
                        continue;
                    }
                    const double f = per_axis == 1 ? 0.5 : static_cast<double>(rest % per_axis) / (per_axis - 1);
                    rest /= per_axis;
                    p[ui] = k.lower()[ui] + f * k.width(i);
                }
                probes.push_back(std::move(p));
            }
        }
    }
    std::vector<std::vector<double>> finals(probes.size());
    parallel_for(probes.size(), [&](std::size_t i) {
        const auto s = integrate_on_grid(local, grid, 0, probes[i], probes[i]);
        finals[i].assign(s.end() - static_cast<std::ptrdiff_t>(un), s.end());
    });
    std::vector<double> lo(un, kInf), hi(un, -kInf);
    for (const auto& f : finals)
        for (std::size_t i = 0; i < un; ++i) {
            lo[i] = std::min(lo[i], f[i]);
            hi[i] = std::max(hi[i], f[i]);
        }
    for (std::size_t i = 0; i < un; ++i) {
        const double pad = 0.1 * (hi[i] - lo[i]) + 1e-12 * (1.0 + std::fabs(hi[i]));
        lo[i] -= pad;
        hi[i] += pad;
    }
    const BoxSet box(lo, hi);

    const double dt_mc = std::max(hcfg.dt, horizon / 200.0);
    std::mt19937_64 rng(hcfg.seed ^ 0x701u);
    std::vector<std::vector<double>> samples;
    samples.reserve(static_cast<std::size_t>(mc_samples));
    for (int s = 0; s < mc_samples; ++s) samples.push_back(uniform_point(box, rng));
    std::vector<char> inside(samples.size(), 0);
    parallel_for(samples.size(), [&](std::size_t s) {
        try {
            const auto back = integrate_backward(local, samples[s], t_end, t0, dt_mc);
            inside[s] = k.contains(back) ? 1 : 0;
        } catch (const BlowUpError&) {
            inside[s] = 0;
        }
    });
    const double hits = static_cast<double>(std::count(inside.begin(), inside.end(), 1));
    const double p = hits / mc_samples;
    rep.estimate = box.volume() * p;
    rep.sigma = box.volume() * std::sqrt(std::max(p * (1.0 - p), 1.0 / mc_samples) / mc_samples);
    rep.check.record(rep.bound, rep.estimate + 3.0 * rep.sigma, slack);
    rep.tight = jacobian_is_constant(local) && std::fabs(rep.bound - rep.estimate) <= 3.0 * rep.sigma;
    rep.check.note = rep.tight ? "tight" : "";
    return rep;
}

CheckResult verify_liouville(const System& sys, double t_end, double dt, double tolerance)
{
    CheckResult out{"liouville"};
    const BoxSet& k = sys.initial_set();
    const auto starts = ensemble_initial_states(k, (1 << k.dimension()) + 1, 0);
    std::vector<CheckResult> per(starts.size());
    parallel_for(starts.size(), [&](std::size_t m) {
        const auto sol = variational(sys, starts[m], t_end, dt);
        for (std::size_t t = 0; t < sol.phi.size(); ++t) {
            const double e = std::exp(sol.log_det[t]);
            per[m].record(std::fabs(sol.phi[t].determinant() - e), tolerance * e, 0.0);
        }
    });
    for (const auto& r : per) {
        out.checks += r.checks;
        out.violations += r.violations;
        out.worst = std::max(out.worst, r.worst);
    }
    return out;
}

CheckResult verify_metzler_monotonicity(int m, int pairs, std::uint64_t seed, double slack)
{
    if (m < 1 || pairs < 1) throw PreconditionError("monotonicity check needs m >= 1 and pairs >= 1");
    CheckResult out{"metzler_monotonicity"};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> off(0.0, 1.0), diag(-2.0, 1.0), bump(0.0, 0.5);
    std::bernoulli_distribution touch(0.5);
    for (int p = 0; p < pairs; ++p) {
        Matrix b(m, m), nb(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                b(i, j) = i == j ? diag(rng) : off(rng);
                nb(i, j) = off(rng);
            }
        Matrix a = b, na = nb;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                if (touch(rng)) a(i, j) += bump(rng);
                if (touch(rng)) na(i, j) += bump(rng);
            }
        const Matrix ea = matrix_exponential(a), eb = matrix_exponential(b);
        for (Norm q : {Norm::One, Norm::Two, Norm::Inf}) {
            out.record(induced_norm(eb, q), induced_norm(ea, q), slack);
            out.record(matrix_measure(b, q), matrix_measure(a, q), slack);
            out.record(induced_norm(nb, q), induced_norm(na, q), slack);
        }
        out.record(spectral_abscissa_metzler(b), spectral_abscissa_metzler(a), slack);
    }
    return out;
}

CheckResult verify_block_domination(const System& sys, const HorizonConfig& hcfg, double slack)
{
    CheckResult out{"block_domination"};
    const Partition inf(sys.partition().sizes(), {Norm::Inf}, Norm::Inf);
    const auto ens = sample_ensemble(sys, sys.initial_set(), hcfg.ensemble, hcfg.t_max, hcfg.dt, hcfg.seed);
    const std::size_t nodes = ens.grid.size();
    const std::size_t stride = std::max<std::size_t>(1, nodes / 400);
    for (std::size_t t = 0; t < nodes; t += stride) {
        for (const auto& p : convex_hull_samples(ens, t, hcfg.combos, hcfg.seed)) {
            const Matrix j = jacobian(sys, ens.grid.times[t], p);
            out.record(global_measure(j, inf), matrix_measure(interconnection_matrix(j, inf), Norm::Inf), slack);
        }
    }
    return out;
}

InvarianceReport verify_initial_time_invariance(const System& sys, const BoxSet& k, double t0, double t1,
                                                const HorizonConfig& hcfg, const EmpiricalConfig& ecfg)
{
    if (t1 < t0) throw PreconditionError("initial-time check needs t1 >= t0");
    InvarianceReport rep;
    const int n = sys.dimension();
    const auto un = static_cast<std::size_t>(n);
    std::vector<double> lo(un, kInf), hi(un, -kInf);
    if (t1 > t0) {
        const auto ens = sample_ensemble(sys.with_initial(k, t0), k, hcfg.ensemble, t1, hcfg.dt, hcfg.seed);
        const std::size_t last = ens.grid.size() - 1;
        for (std::size_t m = 0; m < ens.members(); ++m) {
            const auto s = ens.state(m, last);
            for (std::size_t i = 0; i < un; ++i) {
                lo[i] = std::min(lo[i], s[i]);
                hi[i] = std::max(hi[i], s[i]);
            }
        }
        for (std::size_t i = 0; i < un; ++i)
            if (!(hi[i] > lo[i])) hi[i] = lo[i] + 1e-12 * (1.0 + std::fabs(lo[i]));
    } else {
        lo = k.lower();
        hi = k.upper();
    }
    rep.reach_box = BoxSet(lo, hi);
    rep.from_t0 = estimate_entropy(sys, k, t0, ecfg, hcfg.dt);
    rep.from_t1 = estimate_entropy(sys, rep.reach_box, t1, ecfg, hcfg.dt);
    const double a = rep.from_t0.estimate, b = rep.from_t1.estimate;
    const double scale = std::max(std::fabs(a), std::fabs(b));
    rep.relative_gap = scale > 0.0 ? std::fabs(a - b) / scale : 0.0;
    rep.check.record(std::fabs(a - b), 0.15 * scale + rep.from_t0.band + rep.from_t1.band + 0.05, 0.0);
    return rep;
}

CoverMaxReport verify_cover_max(const System& sys, const BoxSet& k, double t0, int split_axis,
                                const HorizonConfig& hcfg, const EmpiricalConfig& ecfg)
{
    if (split_axis < 0 || split_axis >= k.dimension()) throw PreconditionError("split axis out of range");
    CoverMaxReport rep;
    const auto [low, high] = k.split(split_axis);
    rep.whole = estimate_entropy(sys, k, t0, ecfg, hcfg.dt);
    rep.lower_half = estimate_entropy(sys, low, t0, ecfg, hcfg.dt);
    rep.upper_half = estimate_entropy(sys, high, t0, ecfg, hcfg.dt);
    const double halves = std::max(rep.lower_half.estimate, rep.upper_half.estimate);
    const double scale = std::max(std::fabs(rep.whole.estimate), std::fabs(halves));
    const double band = rep.whole.band + std::max(rep.lower_half.band, rep.upper_half.band);
    rep.check.record(std::fabs(rep.whole.estimate - halves), 0.15 * scale + band + 0.05, 0.0);
    return rep;
}

}  // namespace entrobound
