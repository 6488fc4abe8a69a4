#include "entrobound/empirical.hpp"

#include "entrobound/csv.hpp"
#include "entrobound/error.hpp"
#include "entrobound/ode.hpp"
#include "entrobound/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <unordered_map>

namespace entrobound {

// ---------------------------------------------------------------------------
// Grid

Grid build_grid(const BoxSet& k, std::span<const double> theta, std::span<const double> center)
{
    const int n = k.dimension();
    if (static_cast<int>(theta.size()) != n || static_cast<int>(center.size()) != n)
        throw PreconditionError("grid: theta and center must have dimension n");
    if (!k.contains(center)) throw PreconditionError("grid: center outside K");
    Grid g;
    g.center.assign(center.begin(), center.end());
    g.theta.assign(theta.begin(), theta.end());
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        if (!(theta[ui] > 0.0)) throw PreconditionError("grid: theta must be positive");
        // Lattice indices with center + k theta inside [lower, upper].
        auto lo = static_cast<long long>(std::ceil((k.lower()[ui] - center[ui]) / theta[ui]));
        auto hi = static_cast<long long>(std::floor((k.upper()[ui] - center[ui]) / theta[ui]));
        while (center[ui] + static_cast<double>(lo) * theta[ui] < k.lower()[ui]) ++lo;
        while (center[ui] + static_cast<double>(hi) * theta[ui] > k.upper()[ui]) --hi;
        if (hi - lo + 1 > std::numeric_limits<int>::max()) throw ResolutionError("grid: too many points per axis");
        g.first.push_back(static_cast<int>(lo));
        g.counts.push_back(static_cast<int>(hi - lo + 1));
        total *= static_cast<std::size_t>(hi - lo + 1);
        if (total > 50000000) throw ResolutionError("grid: more than 5e7 points");
    }
    g.points.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        std::vector<double> p(static_cast<std::size_t>(n));
        std::size_t rest = idx;
        for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const auto q = rest % static_cast<std::size_t>(g.counts[ui]);
            rest /= static_cast<std::size_t>(g.counts[ui]);
            p[ui] = center[ui] + static_cast<double>(g.first[ui] + static_cast<long long>(q)) * theta[ui];
        }
        g.points.push_back(std::move(p));
    }
    return g;
}

double log_slope(std::span<const double> horizons, std::span<const double> counts)
{
    const std::size_t m = horizons.size();
    if (m < 2 || counts.size() != m) throw PreconditionError("slope needs at least two points");
    double mt = 0.0, my = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mt += horizons[i];
        my += std::log(counts[i]);
    }
    mt /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sty = 0.0, stt = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sty += (horizons[i] - mt) * (std::log(counts[i]) - my);
        stt += (horizons[i] - mt) * (horizons[i] - mt);
    }
    return sty / stt;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// n = 1

class ScalarCounter {
public:
    ScalarCounter(const System& sys, const BoxSet& k, double t0, double horizon, double dt)
        : sys_(sys), a_(k.lower()[0]), b_(k.upper()[0]),
          grid_(make_time_grid(t0, t0 + horizon, dt, sys.breakpoints()))
    {
    }

    struct Step {
        double lo;  // d(x, x + lo) < eps
        double hi;  // d(x, x + hi) >= eps
    };

    // Packing: left end, then repeatedly the nearest point at distance >= eps.
    // Cover: a center just short of eps from the first uncovered point, then
    // the first point at distance >= eps from that center is uncovered.
    Count pack(double eps) { return count(eps, true); }
    Count cover(double eps) { return count(eps, false); }

private:
    std::vector<double> trajectory(double x) const
    {
        const double xs[1] = {x};
        return integrate_on_grid(sys_, grid_, 0, xs, xs);
    }

    // d(x, y) where tx is the trajectory of x; stops early once above `cap`.
    double distance(const std::vector<double>& tx, double y, double cap) const
    {
        double cur = y, next = 0.0, best = std::fabs(y - tx[0]);
        const double origin[1] = {y};
        for (std::size_t k = 0; k + 1 < grid_.size() && best < cap; ++k) {
            const double t = grid_.times[k];
            try {
                rk4_step(sys_, t, grid_.times[k + 1] - t, std::span<const double>(&cur, 1), std::span<double>(&next, 1),
                         grid_.is_break[k], grid_.is_break[k + 1]);
            } catch (const DomainError& e) {
                throw BlowUpError(std::string("non-finite derivative: ") + e.what(), t, {origin[0]});
            }
            if (!std::isfinite(next) || std::fabs(next) > kBlowUpLimit)
                throw BlowUpError("solution left the representable range (|x| > 1e12)", grid_.times[k + 1],
                                  {origin[0]});
            cur = next;
            best = std::max(best, std::fabs(cur - tx[k + 1]));
        }
        return best;
    }

    // Bracket of inf{d > 0 : d(x, x + d) >= eps}, searched by doubling or
    // halving from `hint` and then Illinois regula falsi.
    Step step(double x, double eps, double hint) const
    {
        const auto tx = trajectory(x);
        const double limit = 4.0 * (b_ - a_) + 4.0 * eps;
        const double cap = 4.0 * eps;
        auto g = [&](double d) { return distance(tx, x + d, cap) - eps; };
        double d = hint > 0.0 && std::isfinite(hint) ? hint : eps;
        double lo = 0.0, glo = -eps, hi = 0.0, ghi = 0.0;
        double gd = g(d);
        if (gd < 0.0) {
            lo = d;
            glo = gd;
            for (;;) {
                d *= 2.0;
                if (d > limit) return {kInf, kInf};
                gd = g(d);
                if (gd >= 0.0) break;
                lo = d;
                glo = gd;
            }
            hi = d;
            ghi = gd;
        } else {
            hi = d;
            ghi = gd;
            for (int i = 0; i < 1100; ++i) {
                d *= 0.5;
                gd = g(d);
                if (gd < 0.0) break;
                hi = d;
                ghi = gd;
            }
            lo = d;
            glo = gd;
        }
        const double resolution = 2.0 * std::max(std::fabs(x), 1.0) * std::numeric_limits<double>::epsilon();
        int side = 0;
        for (int it = 0; it < 200 && hi - lo > std::max(1e-13 * hi, resolution); ++it) {
            double m = hi - ghi * (hi - lo) / (ghi - glo);
            if (!(m > lo && m < hi)) m = 0.5 * (lo + hi);
            const double gm = g(m);
            if (gm >= 0.0) {
                hi = m;
                ghi = gm;
                if (side == 1) glo *= 0.5;
                side = 1;
            } else {
                lo = m;
                glo = gm;
                if (side == -1) ghi *= 0.5;
                side = -1;
            }
        }
        // Steps are realized in floating point; report the realized widths.
        return {(x + lo) - x, (x + hi) - x};
    }

    double step_hi(double x, double eps)
    {
        auto key = std::make_pair(eps, x);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        const double v = step(x, eps, hint_).hi;
        if (std::isfinite(v)) hint_ = v;
        memo_.emplace(key, v);
        return v;
    }

    double inverse_step(double x, double eps)
    {
        const double h = step_hi(x, eps);
        return std::isfinite(h) && h > 0.0 ? 1.0 / h : 0.0;
    }

    // Adaptive Simpson on 1/Delta. Delta itself is only resolved to a few
    // ulps of |x|, so refinement stops at a relative tolerance well above
    // that floor; the remaining error estimate is accumulated in `err`.
    double simpson(double eps, double a, double b, double fa, double fm, double fb, double whole, int depth,
                   double& err)
    {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        const double flm = inverse_step(lm, eps), frm = inverse_step(rm, eps);
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const double sum = left + right;
        const double fmax = std::max({fa, fm, fb, flm, frm});
        const double noise = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::fabs(a), std::fabs(b)) * fmax;
        const double tol = std::max(kSimpsonTolerance, noise);
        if (depth <= 0 || std::fabs(sum - whole) <= 15.0 * tol * std::fabs(sum) + 1e-9) {
            err += std::fabs(sum - whole) / 15.0;
            return sum + (sum - whole) / 15.0;
        }
        return simpson(eps, a, m, fa, flm, fm, left, depth - 1, err) +
               simpson(eps, m, b, fm, frm, fb, right, depth - 1, err);
    }

    struct Integral {
        double value = 0.0;
        double error = 0.0;
    };

    // Integral of 1/Delta over K.
    Integral integral(double eps)
    {
        if (auto it = integrals_.find(eps); it != integrals_.end()) return it->second;
        Integral out;
        // Four panels so that variation inside K is seen before accepting.
        constexpr int pieces = 4;
        for (int i = 0; i < pieces; ++i) {
            const double l = a_ + (b_ - a_) * i / pieces;
            const double r = i + 1 == pieces ? b_ : a_ + (b_ - a_) * (i + 1) / pieces;
            const double fl = inverse_step(l, eps), fr = inverse_step(r, eps);
            const double fmid = inverse_step(0.5 * (l + r), eps);
            out.value += simpson(eps, l, r, fl, fmid, fr, (r - l) / 6.0 * (fl + 4.0 * fmid + fr), 10, out.error);
        }
        integrals_.emplace(eps, out);
        return out;
    }

    Count sweep(double eps, bool packing)
    {
        std::int64_t n = 1;
        double u = a_;
        double hint = hint_;
        for (;;) {
            const Step s = step(u, eps, hint);
            if (!std::isfinite(s.hi)) break;
            hint = s.hi;
            if (packing) {
                u += s.hi;
                if (u > b_) break;
                ++n;
            } else {
                const double c = u + s.lo;
                if (c >= b_) break;
                const Step sc = step(c, eps, hint);
                if (!std::isfinite(sc.hi)) break;
                u = c + sc.hi;
                if (u > b_) break;
                ++n;
            }
        }
        return {n, 0};
    }

    Count count(double eps, bool packing)
    {
        const Integral in = integral(eps);
        const double per_step = packing ? in.value : 0.5 * in.value;
        if (per_step <= kExactLimit) return sweep(eps, packing);
        // Steps are resolved to a few ulps of |x|; propagate that into the count.
        double smallest = kInf;
        for (const auto& [key, v] : memo_)
            if (key.first == eps && v > 0.0) smallest = std::min(smallest, v);
        const double ulp = std::max(std::fabs(a_), std::fabs(b_)) * std::numeric_limits<double>::epsilon();
        const double relative = 1e-9 + 4.0 * ulp / smallest;
        const double spread = per_step * relative + (packing ? in.error : 0.5 * in.error);
        const auto unc = static_cast<std::int64_t>(std::ceil(spread)) + 1;
        return {static_cast<std::int64_t>(std::floor(per_step)) + 1, unc};
    }

    static constexpr double kExactLimit = 160.0;
    static constexpr double kSimpsonTolerance = 1e-6;

    const System& sys_;
    double a_, b_;
    TimeGrid grid_;
    std::map<std::pair<double, double>, double> memo_;
    std::map<double, Integral> integrals_;
    double hint_ = 0.0;
};

// ---------------------------------------------------------------------------
// n = 2 (any n <= 2 with a lattice of candidates)

class LatticeCounter {
public:
    LatticeCounter(const System& sys, const BoxSet& k, double t0, const EmpiricalConfig& cfg, double dt,
                   std::span<const double> horizons, double eps_min)
        : n_(k.dimension())
    {
        const auto un = static_cast<std::size_t>(n_);
        const double t_end = t0 + horizons.back();
        std::vector<double> ends;
        for (double h : horizons) ends.push_back(t0 + h);
        grid_ = make_time_grid(t0, t_end, dt, sys.breakpoints(), ends);
        const System local = sys.with_initial(k, t0);

        // Largest stretch of each axis up to every horizon end, from corners and center.
        stretch_.assign(horizons.size(), std::vector<double>(un, 1.0));
        const auto probes = ensemble_initial_states(k, (1 << n_) + 1, 0);
        for (const auto& p : probes) {
            const auto sol = variational(local, p, t_end, dt);
            for (std::size_t s = 0; s < sol.phi.size(); ++s) {
                const double t = sol.trajectory.times[s];
                for (std::size_t j = 0; j < ends.size(); ++j) {
                    if (t > ends[j] + 1e-9 * dt) continue;
                    for (int i = 0; i < n_; ++i)
                        stretch_[j][static_cast<std::size_t>(i)] = std::max(
                            stretch_[j][static_cast<std::size_t>(i)], sol.phi[s].col(i).cwiseAbs().maxCoeff());
                }
            }
        }
        const auto& longest = stretch_.back();
        double base = 1.0;
        for (int i = 0; i < n_; ++i) base *= k.width(i) * longest[static_cast<std::size_t>(i)] / eps_min + 1.0;
        const double fill = std::pow(static_cast<double>(cfg.candidate_budget) / base, 1.0 / n_);
        resolution_ = std::max(cfg.resolution, std::min(16.0, fill));
        std::vector<double> theta(un);
        for (std::size_t i = 0; i < un; ++i) theta[i] = eps_min / (resolution_ * longest[i]);
        double expected = 1.0;
        for (int i = 0; i < n_; ++i) expected *= std::floor(k.width(i) / theta[static_cast<std::size_t>(i)]) + 1.0;
        if (expected > static_cast<double>(cfg.max_candidates))
            throw ResolutionError("resolution insufficient: " + format_real(expected) + " candidates needed, limit " +
                                  std::to_string(cfg.max_candidates));
        lattice_ = build_grid(k, theta, k.center());

        // Stored sample times: an even spread plus every horizon end.
        const std::size_t last = grid_.size() - 1;
        const auto ms = static_cast<std::size_t>(std::max(2, cfg.metric_samples));
        for (std::size_t i = 0; i <= ms; ++i) sample_nodes_.push_back(last * i / ms);
        for (double e : ends) sample_nodes_.push_back(grid_.index_of(e));
        std::sort(sample_nodes_.begin(), sample_nodes_.end());
        sample_nodes_.erase(std::unique(sample_nodes_.begin(), sample_nodes_.end()), sample_nodes_.end());
        for (double e : ends) {
            const auto node = grid_.index_of(e);
            horizon_samples_.push_back(static_cast<std::size_t>(
                std::upper_bound(sample_nodes_.begin(), sample_nodes_.end(), node) - sample_nodes_.begin()));
            horizon_end_sample_.push_back(horizon_samples_.back() - 1);
        }

        const std::size_t count = lattice_.points.size();
        const std::size_t stride = sample_nodes_.size() * un;
        samples_.resize(count * stride);
        parallel_for(count, [&](std::size_t c) {
            const auto& p = lattice_.points[c];
            const auto states = integrate_on_grid(local, grid_, 0, p, p);
            for (std::size_t s = 0; s < sample_nodes_.size(); ++s)
                for (std::size_t i = 0; i < un; ++i) samples_[c * stride + s * un + i] = states[sample_nodes_[s] * un + i];
        });
    }

    [[nodiscard]] std::size_t candidates() const noexcept { return lattice_.points.size(); }

    struct Result {
        Count pack;
        Count cover;
    };

    Result run(double eps, std::size_t horizon, bool with_cover)
    {
        const auto subset = sublattice(eps, horizon);
        const auto adj = neighbors(subset, eps, horizon);
        const std::size_t count = subset.size();
        // Packing in index order.
        std::vector<char> chosen(count, 0);
        std::int64_t packed = 0;
        for (std::size_t i = 0; i < count; ++i) {
            bool free = true;
            for (auto j = adj.offset[i]; j < adj.offset[i + 1] && free; ++j)
                if (chosen[adj.index[j]]) free = false;
            if (free) {
                chosen[i] = 1;
                ++packed;
            }
        }
        Result r{{packed, 0}, {packed, 0}};
        if (!with_cover) return r;

        // Lazy greedy set cover, ties to the lowest index.
        std::vector<char> covered(count, 0);
        using Entry = std::pair<std::int64_t, std::int64_t>;  // (gain, -index)
        std::priority_queue<Entry> heap;
        for (std::size_t i = 0; i < count; ++i)
            heap.emplace(static_cast<std::int64_t>(adj.offset[i + 1] - adj.offset[i]), -static_cast<std::int64_t>(i));
        std::size_t remaining = count;
        std::int64_t picked = 0;
        while (remaining > 0 && !heap.empty()) {
            auto [gain, neg] = heap.top();
            heap.pop();
            const auto i = static_cast<std::size_t>(-neg);
            std::int64_t fresh = 0;
            for (auto j = adj.offset[i]; j < adj.offset[i + 1]; ++j) fresh += covered[adj.index[j]] ? 0 : 1;
            if (fresh == 0) continue;
            if (fresh < gain) {
                heap.emplace(fresh, neg);
                continue;
            }
            ++picked;
            for (auto j = adj.offset[i]; j < adj.offset[i + 1]; ++j) {
                if (!covered[adj.index[j]]) {
                    covered[adj.index[j]] = 1;
                    --remaining;
                }
            }
        }
        r.cover = {picked, 0};
        return r;
    }

private:
    struct Adjacency {
        std::vector<std::size_t> offset;
        std::vector<std::uint32_t> index;  // positions in the subset
    };

    [[nodiscard]] double distance(std::size_t a, std::size_t b, std::size_t upto) const
    {
        const std::size_t stride = sample_nodes_.size() * static_cast<std::size_t>(n_);
        const double* pa = samples_.data() + a * stride;
        const double* pb = samples_.data() + b * stride;
        double best = 0.0;
        for (std::size_t i = 0; i < upto * static_cast<std::size_t>(n_); ++i) best = std::max(best, std::fabs(pa[i] - pb[i]));
        return best;
    }

    // Candidates on the sub-lattice whose spacing suits (eps, horizon): every
    // axis keeps about `resolution` points per eps of stretched width. The
    // lattice origin (the center of K) is always kept, and adjacent kept
    // points must be closer than eps; strides are halved until they are.
    [[nodiscard]] std::vector<std::uint32_t> sublattice(double eps, std::size_t horizon) const
    {
        const auto un = static_cast<std::size_t>(n_);
        std::vector<long long> step(un);
        for (std::size_t i = 0; i < un; ++i) {
            const double wanted = eps / (resolution_ * stretch_[horizon][i]);
            step[i] = std::max(1LL, static_cast<long long>(std::floor(wanted / lattice_.theta[i] * (1.0 + 1e-12))));
        }
        const std::size_t upto = horizon_samples_[horizon];
        const std::size_t count = candidates();
        for (;;) {
            std::vector<std::uint32_t> keep;
            std::vector<long long> coarse_count(un);
            for (std::size_t c = 0; c < count; ++c) {
                std::size_t rest = c;
                bool ok = true;
                for (std::size_t i = 0; i < un && ok; ++i) {
                    const auto cnt = static_cast<std::size_t>(lattice_.counts[i]);
                    const long long lattice_index = lattice_.first[i] + static_cast<long long>(rest % cnt);
                    rest /= cnt;
                    ok = lattice_index % step[i] == 0;
                }
                if (ok) keep.push_back(static_cast<std::uint32_t>(c));
            }
            // Adjacent kept points along each axis.
            bool resolved = true;
            for (std::size_t c : keep) {
                std::size_t rest = c, place = 1;
                for (std::size_t i = 0; i < un && resolved; ++i) {
                    const auto cnt = static_cast<std::size_t>(lattice_.counts[i]);
                    const auto q = rest % cnt;
                    rest /= cnt;
                    const auto s = static_cast<std::size_t>(step[i]);
                    if (q + s < cnt && distance(c, c + s * place, upto) >= eps) resolved = false;
                    place *= cnt;
                }
                if (!resolved) break;
            }
            if (resolved) return keep;
            if (std::all_of(step.begin(), step.end(), [](long long v) { return v == 1; }))
                throw ResolutionError("resolution insufficient: neighboring candidates are eps apart");
            for (auto& v : step) v = std::max(1LL, v / 2);
        }
    }

    // Candidates within distance < eps, found through cells of side eps in
    // (initial state, state at the horizon end).
    [[nodiscard]] Adjacency neighbors(const std::vector<std::uint32_t>& subset, double eps, std::size_t horizon) const
    {
        const std::size_t count = subset.size();
        const std::size_t upto = horizon_samples_[horizon];
        const std::size_t end_sample = horizon_end_sample_[horizon];
        const std::size_t stride = sample_nodes_.size() * static_cast<std::size_t>(n_);
        const int dims = 2 * n_;
        struct KeyHash {
            std::size_t operator()(const std::array<long long, 4>& k) const noexcept
            {
                std::size_t h = 1469598103934665603ull;
                for (long long v : k) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
                return h;
            }
        };
        std::unordered_map<std::array<long long, 4>, std::vector<std::uint32_t>, KeyHash> cells;
        std::vector<std::array<long long, 4>> keys(count);
        for (std::size_t c = 0; c < count; ++c) {
            const double* p = samples_.data() + subset[c] * stride;
            keys[c].fill(0);
            for (int i = 0; i < n_; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                keys[c][ui] = static_cast<long long>(std::floor(p[i] / eps));
                keys[c][static_cast<std::size_t>(n_) + ui] =
                    static_cast<long long>(std::floor(p[end_sample * static_cast<std::size_t>(n_) + ui] / eps));
            }
            cells[keys[c]].push_back(static_cast<std::uint32_t>(c));
        }
        std::vector<std::vector<std::uint32_t>> lists(count);
        int offsets = 1;
        for (int d = 0; d < dims; ++d) offsets *= 3;
        parallel_for(count, [&](std::size_t c) {
            auto& out = lists[c];
            for (int o = 0; o < offsets; ++o) {
                int rest = o;
                auto probe = keys[c];
                for (int d = 0; d < dims; ++d) {
                    probe[static_cast<std::size_t>(d)] += rest % 3 - 1;
                    rest /= 3;
                }
                auto it = cells.find(probe);
                if (it == cells.end()) continue;
                for (auto j : it->second)
                    if (distance(subset[c], subset[j], upto) < eps) out.push_back(j);
            }
            std::sort(out.begin(), out.end());
        });
        Adjacency adj;
        adj.offset.assign(1, 0);
        for (const auto& l : lists) {
            adj.index.insert(adj.index.end(), l.begin(), l.end());
            adj.offset.push_back(adj.index.size());
        }
        return adj;
    }

    int n_;
    double resolution_ = 4.0;
    TimeGrid grid_;
    Grid lattice_;
    std::vector<std::vector<double>> stretch_;     // per horizon, per axis
    std::vector<std::size_t> sample_nodes_;
    std::vector<std::size_t> horizon_samples_;     // samples used by horizon j
    std::vector<std::size_t> horizon_end_sample_;  // sample at the end of horizon j
    std::vector<double> samples_;
};

void require_estimable(const System& sys, const BoxSet& k)
{
    if (k.dimension() != sys.dimension()) throw PreconditionError("initial set dimension mismatch");
    if (sys.dimension() > 2) throw PreconditionError("empirical estimation supports n <= 2");
}

}  // namespace

Count greedy_spanning_count(const System& sys, const BoxSet& k, double eps, double horizon, double t0, double dt,
                            double resolution)
{
    require_estimable(sys, k);
    if (!(eps > 0.0) || !(horizon >= 0.0)) throw PreconditionError("eps must be positive and T nonnegative");
    if (sys.dimension() == 1) return ScalarCounter(sys, k, t0, horizon, dt).cover(eps);
    EmpiricalConfig cfg;
    cfg.resolution = resolution;
    const double hs[1] = {horizon};
    LatticeCounter lc(sys, k, t0, cfg, dt, hs, eps);
    return lc.run(eps, 0, true).cover;
}

Count greedy_separated_count(const System& sys, const BoxSet& k, double eps, double horizon, double t0, double dt,
                             double resolution)
{
    require_estimable(sys, k);
    if (!(eps > 0.0) || !(horizon >= 0.0)) throw PreconditionError("eps must be positive and T nonnegative");
    if (sys.dimension() == 1) return ScalarCounter(sys, k, t0, horizon, dt).pack(eps);
    EmpiricalConfig cfg;
    cfg.resolution = resolution;
    const double hs[1] = {horizon};
    LatticeCounter lc(sys, k, t0, cfg, dt, hs, eps);
    return lc.run(eps, 0, false).pack;
}

EntropyEstimate estimate_entropy(const System& sys, const BoxSet& k, double t0, const EmpiricalConfig& cfg, double dt)
{
    require_estimable(sys, k);
    const auto& eps = cfg.eps;
    const auto& hs = cfg.horizons;
    if (eps.size() < 3 || hs.size() < 3) throw PreconditionError("need at least three eps values and three horizons");
    for (std::size_t i = 1; i < eps.size(); ++i)
        if (!(eps[i] < eps[i - 1])) throw PreconditionError("eps list must be decreasing");
    for (std::size_t i = 1; i < hs.size(); ++i)
        if (!(hs[i] > hs[i - 1])) throw PreconditionError("horizon list must be increasing");
    if (!(eps.back() > 0.0) || !(hs.front() >= 0.0)) throw PreconditionError("eps must be positive and T nonnegative");

    const std::size_t ne = eps.size(), nh = hs.size();
    // Raw counts: packing and cover at eps, packing at 2 eps.
    std::vector<Count> pack(ne * nh), cover(ne * nh), pack2(ne * nh);
    EntropyEstimate est;
    est.eps = eps;
    est.horizons = hs;
    if (sys.dimension() == 1) {
        parallel_for(nh, [&](std::size_t t) {
            ScalarCounter sc(sys, k, t0, hs[t], dt);
            for (std::size_t e = 0; e < ne; ++e) {
                pack[e * nh + t] = sc.pack(eps[e]);
                cover[e * nh + t] = sc.cover(eps[e]);
                pack2[e * nh + t] = sc.pack(2.0 * eps[e]);
            }
        });
    } else {
        LatticeCounter lc(sys, k, t0, cfg, dt, hs, eps.back());
        est.candidates = lc.candidates();
        for (std::size_t e = 0; e < ne; ++e) {
            for (std::size_t t = 0; t < nh; ++t) {
                const auto r = lc.run(eps[e], t, true);
                pack[e * nh + t] = r.pack;
                cover[e * nh + t] = r.cover;
                pack2[e * nh + t] = lc.run(2.0 * eps[e], t, false).pack;
            }
        }
    }

    // Every packing is a separated set for any (eps', T') with eps' <= its eps
    // and T' >= its T; every maximal packing and every cover spans any
    // (eps', T') with eps' >= its eps and T' <= its T.
    struct Config {
        double eps;
        std::size_t t;
        Count pack;
        Count span;
    };
    std::vector<Config> all;
    for (std::size_t e = 0; e < ne; ++e) {
        for (std::size_t t = 0; t < nh; ++t) {
            const auto i = e * nh + t;
            const Count sp = cover[i].value <= pack[i].value ? cover[i] : pack[i];
            all.push_back({eps[e], t, pack[i], sp});
            all.push_back({2.0 * eps[e], t, pack2[i], pack2[i]});
        }
    }
    const double rel = 1e-12;
    auto separated = [&](double e, std::size_t t) {
        Count best{0, 0};
        for (const auto& c : all)
            if (c.eps >= e * (1.0 - rel) && c.t <= t && c.pack.value > best.value) best = c.pack;
        return best;
    };
    auto spanning = [&](double e, std::size_t t) {
        Count best{std::numeric_limits<std::int64_t>::max(), 0};
        for (const auto& c : all)
            if (c.eps <= e * (1.0 + rel) && c.t >= t && c.span.value < best.value) best = c.span;
        return best;
    };
    for (std::size_t e = 0; e < ne; ++e) {
        for (std::size_t t = 0; t < nh; ++t) {
            EntropyRow row;
            row.eps = eps[e];
            row.horizon = hs[t];
            row.sep = separated(eps[e], t);
            row.span = spanning(eps[e], t);
            row.sep_double = separated(2.0 * eps[e], t);
            est.rows.push_back(row);
        }
    }
    for (std::size_t e = 0; e < ne; ++e) {
        std::vector<double> s(nh), p(nh);
        for (std::size_t t = 0; t < nh; ++t) {
            s[t] = static_cast<double>(est.row(e, t).span.value);
            p[t] = static_cast<double>(est.row(e, t).sep.value);
        }
        est.span_slope.push_back(log_slope(hs, s));
        est.sep_slope.push_back(log_slope(hs, p));
    }
    est.estimate = est.sep_slope.back();
    for (std::size_t e = 0; e < ne; ++e)
        est.band = std::max({est.band, std::fabs(est.span_slope[e] - est.estimate),
                             std::fabs(est.sep_slope[e] - est.estimate)});
    return est;
}

std::string entropy_csv(const EntropyEstimate& e)
{
    std::string out = "eps,T,span_count,sep_count,span_slope,sep_slope,estimate,band\r\n";
    for (std::size_t i = 0; i < e.eps.size(); ++i) {
        for (std::size_t t = 0; t < e.horizons.size(); ++t) {
            const auto& r = e.row(i, t);
            const std::vector<std::string> f{format_real(r.eps),          format_real(r.horizon),
                                             std::to_string(r.span.value), std::to_string(r.sep.value),
                                             format_real(e.span_slope[i]), format_real(e.sep_slope[i]),
                                             format_real(e.estimate),      format_real(e.band)};
            out += csv_row(f);
        }
    }
    return out;
}

}  // namespace entrobound
