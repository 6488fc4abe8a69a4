#include "entrobound/bounds.hpp"

#include "entrobound/csv.hpp"
#include "entrobound/error.hpp"
#include "entrobound/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace entrobound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kWindowAgreement = 1e-3;
constexpr std::size_t kMaxPeaksPerSeries = 512;

double worst(Sense s)
{
    return s == Sense::Max ? -kInf : kInf;
}

bool better(Sense s, double a, double b)
{
    return s == Sense::Max ? a > b : a < b;
}

double positive_part(double v)
{
    return v > 0.0 ? v : 0.0;
}

std::size_t first_index_at_or_after(const TimeGrid& grid, double t)
{
    auto it = std::lower_bound(grid.times.begin(), grid.times.end(), t);
    if (it == grid.times.end()) return grid.size() - 1;
    return static_cast<std::size_t>(it - grid.times.begin());
}

}  // namespace

bool BoundReport::converged() const
{
    return std::find(qualifiers.begin(), qualifiers.end(), kNonConvergedQualifier) == qualifiers.end();
}

const std::vector<std::string>& result_ids()
{
    static const std::vector<std::string> ids{
        "measure_inf",        "measure_one",        "measure_two",     "trace",
        "metzler",            "ltv",                "network_measure", "network_metzler",
        "measure_t1_inf",     "measure_t1_one",     "measure_t1_two",  "network_measure_t1",
        "network_metzler_t1", "superset_inf",       "superset_one",    "superset_two"};
    return ids;
}

std::vector<double> default_t1_list(double t0, double t_max)
{
    const double half = 0.5 * (t_max - t0);
    return {t0 + half / 16.0, t0 + half / 8.0, t0 + half / 4.0, t0 + half / 2.0, t0 + half};
}

// ---------------------------------------------------------------------------
// Sweeps

Sweep::Sweep(std::size_t values_, const TimeGrid& grid_) : values(values_), grid(&grid_) {}

double Sweep::extremum(std::size_t v, Sense s, double ta, double tb) const
{
    double best = worst(s);
    for (std::size_t k = k_from; k <= k_to; ++k) {
        const double t = grid->times[k];
        if (t < ta || t > tb) continue;
        const double y = per_time[(k - k_from) * values + v];
        if (better(s, y, best)) best = y;
    }
    for (const auto& p : peaks)
        if (p.value == v && p.t >= ta && p.t <= tb && better(s, p.y, best)) best = p.y;
    return best;
}

namespace {

// Objective value `v` at an intermediate time tau near node k of member m.
double value_between(const System& sys, const ReachEnsemble& ens, const Objective& obj, std::size_t m,
                     std::size_t k, std::size_t v, double tau, bool frozen, std::vector<double>& x,
                     std::vector<double>& vals, Matrix& jac)
{
    const auto& g = ens.grid;
    const std::size_t base = tau <= g.times[k] ? k - 1 : k;
    const auto s = ens.state(m, frozen ? k : base);
    const double h = tau - g.times[base];
    if (frozen || h == 0.0) {
        std::copy(s.begin(), s.end(), x.begin());
    } else {
        rk4_step(sys, g.times[base], h, s, x, g.is_break[base], false);
    }
    sys.eval_jacobian(tau, x, jac);
    obj.eval(jac, vals);
    return vals[v];
}

// Golden-section search for the extremum of value v on [t_{k-1}, t_{k+1}].
Sweep::Peak refine(const System& sys, const ReachEnsemble& ens, const Objective& obj, std::size_t m, std::size_t k,
                   std::size_t v, bool frozen)
{
    const auto& g = ens.grid;
    const Sense sense = obj.sense[v];
    const double sign = sense == Sense::Max ? 1.0 : -1.0;
    std::vector<double> x(static_cast<std::size_t>(ens.n)), vals(obj.sense.size());
    Matrix jac;
    auto f = [&](double tau) { return sign * value_between(sys, ens, obj, m, k, v, tau, frozen, x, vals, jac); };

    constexpr double inv_phi = 0.6180339887498949;
    double a = g.times[k - 1], b = g.times[k + 1];
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 60 && b - a > 1e-15 * std::max(1.0, std::fabs(a)); ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc >= fd ? Sweep::Peak{c, v, sign * fc} : Sweep::Peak{d, v, sign * fd};
}

}  // namespace

Sweep sweep_objective(const System& sys, const ReachEnsemble& ens, const Objective& obj, std::size_t k_from,
                      std::size_t k_to, int combos, std::uint64_t seed, bool frozen)
{
    const std::size_t nv = obj.sense.size();
    if (k_from > k_to || k_to >= ens.grid.size()) throw PreconditionError("sweep window outside the grid");
    Sweep sw(nv, ens.grid);
    sw.k_from = k_from;
    sw.k_to = k_to;
    const std::size_t span = k_to - k_from + 1;
    const std::size_t members = ens.members();
    sw.per_time.resize(span * nv);
    // member_vals[(m * span + (k - k_from)) * nv + v]
    std::vector<double> member_vals(members * span * nv);

    const int pool = combo_pool(ens);
    const int use_combos = obj.use_combos ? combos : 0;
    const std::size_t chunks = std::min<std::size_t>(span, 4 * std::max(1u, std::thread::hardware_concurrency()));
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t begin = k_from + span * c / chunks;
        const std::size_t end = k_from + span * (c + 1) / chunks;
        Matrix jac;
        std::vector<double> vals(nv), x(static_cast<std::size_t>(ens.n));
        for (std::size_t k = begin; k < end; ++k) {
            const double t = ens.grid.times[k];
            double* row = sw.per_time.data() + (k - k_from) * nv;
            for (std::size_t v = 0; v < nv; ++v) row[v] = worst(obj.sense[v]);
            auto absorb = [&] {
                for (std::size_t v = 0; v < nv; ++v)
                    if (better(obj.sense[v], vals[v], row[v])) row[v] = vals[v];
            };
            for (std::size_t m = 0; m < members; ++m) {
                sys.eval_jacobian(t, ens.state(m, k), jac);
                obj.eval(jac, vals);
                std::copy(vals.begin(), vals.end(), member_vals.begin() + static_cast<long>((m * span + (k - k_from)) * nv));
                absorb();
            }
            if (use_combos > 0) {
                for (const auto& hc : hull_combos(pool, use_combos, seed, k)) {
                    apply_combo(ens, k, hc, x);
                    sys.eval_jacobian(t, x, jac);
                    obj.eval(jac, vals);
                    absorb();
                }
            }
        }
    });

    // Local time-extrema of each member series are refined between nodes.
    if (span >= 3) {
        std::vector<std::vector<Sweep::Peak>> found(members);
        parallel_for(members, [&](std::size_t m) {
            for (std::size_t v = 0; v < nv; ++v) {
                const Sense s = obj.sense[v];
                auto at = [&](std::size_t k) { return member_vals[(m * span + (k - k_from)) * nv + v]; };
                std::vector<std::size_t> cand;
                for (std::size_t k = k_from + 1; k < k_to; ++k) {
                    const double y = at(k), l = at(k - 1), r = at(k + 1);
                    const bool local = s == Sense::Max ? (y >= l && y >= r && (y > l || y > r))
                                                       : (y <= l && y <= r && (y < l || y < r));
                    if (local) cand.push_back(k);
                }
                if (cand.size() > kMaxPeaksPerSeries) {
                    std::stable_sort(cand.begin(), cand.end(),
                                     [&](std::size_t a, std::size_t b) { return better(s, at(a), at(b)); });
                    cand.resize(kMaxPeaksPerSeries);
                }
                for (std::size_t k : cand) {
                    auto p = refine(sys, ens, obj, m, k, v, frozen);
                    if (better(s, p.y, at(k))) found[m].push_back(p);
                }
            }
        });
        for (auto& f : found) sw.peaks.insert(sw.peaks.end(), f.begin(), f.end());
    }
    return sw;
}

// ---------------------------------------------------------------------------
// Objectives

namespace {

Objective measure_objective(Norm p)
{
    return {{Sense::Max}, [p](const Matrix& j, std::span<double> out) { out[0] = matrix_measure(j, p); }, true};
}

Objective trace_objective()
{
    return {{Sense::Min}, [](const Matrix& j, std::span<double> out) { out[0] = j.trace(); }, false};
}

// Signed diagonal, absolute off-diagonal entries, row-major.
Objective metzler_objective(int n)
{
    return {std::vector<Sense>(static_cast<std::size_t>(n * n), Sense::Max),
            [n](const Matrix& j, std::span<double> out) {
                for (int r = 0; r < n; ++r)
                    for (int c = 0; c < n; ++c)
                        out[static_cast<std::size_t>(r * n + c)] = r == c ? j(r, c) : std::fabs(j(r, c));
            },
            true};
}

Objective network_measure_objective(const Partition& part)
{
    return {{Sense::Max},
            [part](const Matrix& j, std::span<double> out) {
                out[0] = matrix_measure(interconnection_matrix(j, part), part.network());
            },
            true};
}

Objective network_entries_objective(const Partition& part)
{
    const int m = part.blocks();
    return {std::vector<Sense>(static_cast<std::size_t>(m * m), Sense::Max),
            [part, m](const Matrix& j, std::span<double> out) {
                const Matrix a = interconnection_matrix(j, part);
                for (int r = 0; r < m; ++r)
                    for (int c = 0; c < m; ++c) out[static_cast<std::size_t>(r * m + c)] = a(r, c);
            },
            true};
}

Matrix matrix_from_sweep(const Sweep& sw, int size, double ta, double tb)
{
    Matrix a(size, size);
    for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c)
            a(r, c) = sw.extremum(static_cast<std::size_t>(r * size + c), Sense::Max, ta, tb);
    return a;
}

void require_finite(double v, const std::string& what)
{
    if (!std::isfinite(v)) throw DomainError(what + ": no finite samples in the window");
}

}  // namespace

// ---------------------------------------------------------------------------
// Session

BoundSession::BoundSession(const System& sys, const BoxSet& k, HorizonConfig cfg)
    : sys_(sys), k_(k), cfg_(std::move(cfg))
{
    if (k_.dimension() != sys_.dimension()) throw PreconditionError("initial set dimension mismatch");
    if (!(cfg_.tail_fraction > 0.0 && cfg_.tail_fraction < 1.0))
        throw PreconditionError("tail_fraction must lie in (0, 1)");
    if (!(cfg_.t_max > sys_.t0())) throw PreconditionError("t_max must exceed t0");
    if (!(cfg_.dt > 0.0)) throw PreconditionError("dt must be positive");
    if (cfg_.ensemble < 2) throw PreconditionError("ensemble needs at least two members");
    if (cfg_.combos < 0) throw PreconditionError("combos must be nonnegative");
    auto list = cfg_.t1_list.empty() ? default_t1_list(sys_.t0(), cfg_.t_max) : cfg_.t1_list;
    for (double t1 : list)
        if (t1 >= sys_.t0() && t1 < cfg_.t_max) t1_list_.push_back(t1);
    std::sort(t1_list_.begin(), t1_list_.end());
    t1_list_.erase(std::unique(t1_list_.begin(), t1_list_.end()), t1_list_.end());
}

const ReachEnsemble& BoundSession::ensemble()
{
    if (!ens_) {
        ens_ = sample_ensemble(sys_.with_initial(k_, sys_.t0()), k_, cfg_.ensemble, cfg_.t_max, cfg_.dt, cfg_.seed,
                               t1_list_);
    }
    return *ens_;
}

BoundSession::Window BoundSession::tail_window() const
{
    const double t0 = sys_.t0();
    const double span = cfg_.t_max - t0;
    Window w{};
    w.ta = t0 + (1.0 - cfg_.tail_fraction) * span;
    w.ta_half = t0 + (1.0 - 0.5 * cfg_.tail_fraction) * span;
    w.tb = cfg_.t_max;
    const auto& g = ens_->grid;
    w.k_from = first_index_at_or_after(g, w.ta);
    w.k_to = g.size() - 1;
    return w;
}

BoundReport BoundSession::base_report(std::string id) const
{
    BoundReport r;
    r.result_id = std::move(id);
    r.config = cfg_;
    r.config.t1_list = t1_list_;
    r.n = sys_.dimension();
    r.qualifiers.emplace_back(kSampledQualifier);
    return r;
}

BoundReport BoundSession::scalar_max(std::string id, const Objective& obj)
{
    (void)ensemble();
    const auto w = tail_window();
    const auto sw = sweep_objective(sys_, *ens_, obj, w.k_from, w.k_to, cfg_.combos, cfg_.seed);
    const Sense s = obj.sense[0];
    const double full = sw.extremum(0, s, w.ta, w.tb);
    const double half = sw.extremum(0, s, w.ta_half, w.tb);
    require_finite(full, id);
    auto r = base_report(std::move(id));
    if (s == Sense::Max) {
        r.mu_hat = full;
        r.bound = r.n * positive_part(full);
    } else {
        r.chi_check = full;
        r.bound = positive_part(full);
    }
    r.intermediates.emplace_back("half_window", half);
    if (!(std::fabs(full - half) <= kWindowAgreement)) r.qualifiers.emplace_back(kNonConvergedQualifier);
    return r;
}

BoundReport BoundSession::metzler_from(std::string id, const Objective& obj, int size)
{
    (void)ensemble();
    const auto w = tail_window();
    const auto sw = sweep_objective(sys_, *ens_, obj, w.k_from, w.k_to, cfg_.combos, cfg_.seed);
    const Matrix a = matrix_from_sweep(sw, size, w.ta, w.tb);
    const Matrix a_half = matrix_from_sweep(sw, size, w.ta_half, w.tb);
    if (!a.allFinite()) throw DomainError(id + ": no finite samples in the window");
    const double s = spectral_abscissa_metzler(a);
    const double s_half = spectral_abscissa_metzler(a_half);
    auto r = base_report(std::move(id));
    r.metzler = a;
    r.spabs = s;
    r.bound = r.n * positive_part(s);
    r.intermediates.emplace_back("half_window", s_half);
    if (!(std::fabs(s - s_half) <= kWindowAgreement)) r.qualifiers.emplace_back(kNonConvergedQualifier);
    return r;
}

BoundReport BoundSession::measure(Norm p)
{
    return scalar_max("measure_" + std::string(norm_name(p)), measure_objective(p));
}

BoundReport BoundSession::trace()
{
    return scalar_max("trace", trace_objective());
}

BoundReport BoundSession::metzler()
{
    return metzler_from("metzler", metzler_objective(sys_.dimension()), sys_.dimension());
}

BoundReport BoundSession::network_measure()
{
    return scalar_max("network_measure", network_measure_objective(sys_.partition()));
}

BoundReport BoundSession::network_metzler()
{
    return metzler_from("network_metzler", network_entries_objective(sys_.partition()), sys_.partition().blocks());
}

const std::vector<ReachEnsemble>& BoundSession::reinitialized()
{
    if (reinit_) return *reinit_;
    if (t1_list_.empty()) throw PreconditionError("t1_list has no time inside [t0, t_max)");
    const auto& ens = ensemble();
    std::vector<ReachEnsemble> out;
    for (double t1 : t1_list_) {
        const auto k1 = ens.grid.index_of(t1);
        out.push_back(propagate(sys_, ens.grid, k1, convex_hull_samples(ens, k1, cfg_.combos, cfg_.seed)));
    }
    reinit_ = std::move(out);
    return *reinit_;
}

BoundReport BoundSession::scalar_t1(std::string id, const Objective& obj)
{
    const auto& reinit = reinitialized();
    const auto w = tail_window();
    double best = kInf, best_half = kInf;
    auto r = base_report(std::move(id));
    for (std::size_t i = 0; i < t1_list_.size(); ++i) {
        const auto& g = reinit[i].grid;
        const double t1 = t1_list_[i];
        const double ta = std::max(w.ta, t1);
        const auto sw = sweep_objective(sys_, reinit[i], obj, first_index_at_or_after(g, ta), g.size() - 1, 0,
                                        cfg_.seed);
        const double v = sw.extremum(0, Sense::Max, ta, w.tb);
        const double vh = sw.extremum(0, Sense::Max, std::max(w.ta_half, t1), w.tb);
        require_finite(v, r.result_id);
        r.intermediates.emplace_back("t1=" + format_real(t1), v);
        best = std::min(best, v);
        best_half = std::min(best_half, vh);
    }
    r.mu_hat = best;
    r.bound = r.n * positive_part(best);
    r.intermediates.emplace_back("half_window", best_half);
    if (!(std::fabs(best - best_half) <= kWindowAgreement)) r.qualifiers.emplace_back(kNonConvergedQualifier);
    return r;
}

BoundReport BoundSession::measure_t1(Norm p)
{
    return scalar_t1("measure_t1_" + std::string(norm_name(p)), measure_objective(p));
}

BoundReport BoundSession::network_measure_t1()
{
    return scalar_t1("network_measure_t1", network_measure_objective(sys_.partition()));
}

BoundReport BoundSession::network_metzler_t1()
{
    const auto& reinit = reinitialized();
    const int m = sys_.partition().blocks();
    const auto obj = network_entries_objective(sys_.partition());
    const double t_short = cfg_.t_max - 0.5 * cfg_.tail_fraction * (cfg_.t_max - sys_.t0());
    Matrix star = Matrix::Constant(m, m, kInf), star_short = Matrix::Constant(m, m, kInf);
    auto r = base_report("network_metzler_t1");
    for (std::size_t i = 0; i < t1_list_.size(); ++i) {
        const auto& g = reinit[i].grid;
        const double t1 = t1_list_[i];
        const auto sw = sweep_objective(sys_, reinit[i], obj, g.index_of(t1), g.size() - 1, 0, cfg_.seed);
        // sup over t >= t1, not a tail limsup
        const Matrix a = matrix_from_sweep(sw, m, t1, cfg_.t_max);
        const Matrix a_short = matrix_from_sweep(sw, m, t1, std::max(t1, t_short));
        if (!a.allFinite()) throw DomainError("network_metzler_t1: no finite samples");
        star = star.cwiseMin(a);
        star_short = star_short.cwiseMin(a_short);
        r.intermediates.emplace_back("t1=" + format_real(t1) + ":spabs", spectral_abscissa_metzler(a));
    }
    const double s = spectral_abscissa_metzler(star);
    const double s_short = star_short.allFinite() ? spectral_abscissa_metzler(star_short) : s;
    r.metzler = star;
    r.spabs = s;
    r.bound = r.n * positive_part(s);
    r.intermediates.emplace_back("shorter_horizon", s_short);
    if (!(std::fabs(s - s_short) <= kWindowAgreement)) r.qualifiers.emplace_back(kNonConvergedQualifier);
    return r;
}

// ---------------------------------------------------------------------------
// Free functions

BoundReport upper_bound_measure(const System& sys, const BoxSet& k, Norm p, const HorizonConfig& cfg)
{
    return BoundSession(sys, k, cfg).measure(p);
}

BoundReport lower_bound_trace(const System& sys, const BoxSet& k, const HorizonConfig& cfg)
{
    return BoundSession(sys, k, cfg).trace();
}

BoundReport upper_bound_metzler_scalar(const System& sys, const BoxSet& k, const HorizonConfig& cfg)
{
    return BoundSession(sys, k, cfg).metzler();
}

BoundReport upper_bound_network_measure(const System& sys, const BoxSet& k, const HorizonConfig& cfg)
{
    return BoundSession(sys, k, cfg).network_measure();
}

BoundReport upper_bound_network_metzler(const System& sys, const BoxSet& k, const HorizonConfig& cfg)
{
    return BoundSession(sys, k, cfg).network_metzler();
}

BoundReport upper_bound_measure_t1(const System& sys, const BoxSet& k, Norm p, const HorizonConfig& cfg)
{
    return BoundSession(sys, k, cfg).measure_t1(p);
}

BoundReport upper_bound_network_metzler_t1(const System& sys, const BoxSet& k, const HorizonConfig& cfg)
{
    return BoundSession(sys, k, cfg).network_metzler_t1();
}

BoundReport upper_bound_network_measure_t1(const System& sys, const BoxSet& k, const HorizonConfig& cfg)
{
    return BoundSession(sys, k, cfg).network_measure_t1();
}

BoundReport ltv_bounds(const System& sys, const HorizonConfig& cfg, Norm p, double linear_tolerance)
{
    const int n = sys.dimension();
    if (!(cfg.t_max > sys.t0())) throw PreconditionError("t_max must exceed t0");
    if (!(cfg.tail_fraction > 0.0 && cfg.tail_fraction < 1.0))
        throw PreconditionError("tail_fraction must lie in (0, 1)");
    const auto grid = make_time_grid(sys.t0(), cfg.t_max, cfg.dt, sys.breakpoints());

    // Linearity probe: J(t, x) must not depend on x.
    auto probes = ensemble_initial_states(sys.initial_set(), (1 << n) + 9, cfg.seed);
    const auto count = probes.size();
    for (std::size_t i = 0; i < count; ++i) {
        auto far = probes[i];
        for (auto& v : far) v = 10.0 * v + 1.0;
        probes.push_back(std::move(far));
    }
    const std::vector<double> zero(static_cast<std::size_t>(n), 0.0);
    Matrix j0, jx;
    for (int s = 0; s <= 64; ++s) {
        const double t = grid.times[(grid.size() - 1) * static_cast<std::size_t>(s) / 64];
        sys.eval_jacobian(t, zero, j0);
        for (const auto& x : probes) {
            sys.eval_jacobian(t, x, jx);
            const double dev = induced_norm(jx - j0, Norm::Inf);
            if (dev > linear_tolerance)
                throw PreconditionError("system is not linear time-varying: |J(t,x) - J(t,0)| = " + format_real(dev) +
                                        " at t = " + format_real(t));
        }
    }

    ReachEnsemble ens;
    ens.grid = grid;
    ens.n = n;
    ens.initial_states = {zero};
    ens.states = {std::vector<double>(grid.size() * static_cast<std::size_t>(n), 0.0)};

    const double t0 = sys.t0();
    const double span = cfg.t_max - t0;
    const double ta = t0 + (1.0 - cfg.tail_fraction) * span;
    const double ta_half = t0 + (1.0 - 0.5 * cfg.tail_fraction) * span;
    const auto k_from = first_index_at_or_after(grid, ta);
    const auto k_to = grid.size() - 1;

    const auto mu = sweep_objective(sys, ens, measure_objective(p), k_from, k_to, 0, cfg.seed, true);
    const auto tr = sweep_objective(sys, ens, trace_objective(), k_from, k_to, 0, cfg.seed, true);
    const auto mz = sweep_objective(sys, ens, metzler_objective(n), k_from, k_to, 0, cfg.seed, true);

    BoundReport r;
    r.result_id = "ltv";
    r.config = cfg;
    r.n = n;
    r.mu_hat = mu.extremum(0, Sense::Max, ta, cfg.t_max);
    r.chi_check = tr.extremum(0, Sense::Min, ta, cfg.t_max);
    r.metzler = matrix_from_sweep(mz, n, ta, cfg.t_max);
    r.spabs = spectral_abscissa_metzler(r.metzler);
    r.bound = n * positive_part(*r.mu_hat);
    r.intermediates.emplace_back("upper_measure", r.bound);
    r.intermediates.emplace_back("upper_metzler", n * positive_part(*r.spabs));
    r.intermediates.emplace_back("lower_trace", positive_part(*r.chi_check));
    r.qualifiers.emplace_back(kSampledQualifier);
    const double mu_half = mu.extremum(0, Sense::Max, ta_half, cfg.t_max);
    const double tr_half = tr.extremum(0, Sense::Min, ta_half, cfg.t_max);
    const double s_half = spectral_abscissa_metzler(matrix_from_sweep(mz, n, ta_half, cfg.t_max));
    if (!(std::fabs(*r.mu_hat - mu_half) <= kWindowAgreement && std::fabs(*r.chi_check - tr_half) <= kWindowAgreement &&
          std::fabs(*r.spabs - s_half) <= kWindowAgreement))
        r.qualifiers.emplace_back(kNonConvergedQualifier);
    return r;
}

BoundReport upper_bound_superset(const System& sys, const BoxSet& s, Norm p, std::span<const double> t_grid,
                                 int points_per_axis)
{
    const int n = sys.dimension();
    if (s.dimension() != n) throw PreconditionError("superset dimension mismatch");
    if (t_grid.empty()) throw PreconditionError("superset bound needs at least one time");
    if (points_per_axis <= 0) points_per_axis = n == 1 ? 2001 : n == 2 ? 201 : n == 3 ? 41 : 11;
    std::size_t total = 1;
    for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(points_per_axis);

    std::vector<double> best(t_grid.size(), -kInf);
    parallel_for(t_grid.size(), [&](std::size_t ti) {
        std::vector<double> x(static_cast<std::size_t>(n));
        Matrix jac;
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t rest = idx;
            for (int d = 0; d < n; ++d) {
                const auto q = rest % static_cast<std::size_t>(points_per_axis);
                rest /= static_cast<std::size_t>(points_per_axis);
                const double u = points_per_axis == 1 ? 0.5 : static_cast<double>(q) / (points_per_axis - 1);
                x[static_cast<std::size_t>(d)] = s.lower()[static_cast<std::size_t>(d)] + u * s.width(d);
            }
            sys.eval_jacobian(t_grid[ti], x, jac);
            best[ti] = std::max(best[ti], matrix_measure(jac, p));
        }
    });
    BoundReport r;
    r.result_id = "superset_" + std::string(norm_name(p));
    r.n = n;
    r.mu_hat = *std::max_element(best.begin(), best.end());
    r.bound = n * positive_part(*r.mu_hat);
    r.qualifiers.emplace_back(kSampledQualifier);
    r.qualifiers.emplace_back("superset containment assumed, not checked");
    return r;
}

BoundReport compute_bound(BoundSession& session, const System& sys, const std::string& id,
                          const std::optional<BoxSet>& superset)
{
    if (id == "measure_inf") return session.measure(Norm::Inf);
    if (id == "measure_one") return session.measure(Norm::One);
    if (id == "measure_two") return session.measure(Norm::Two);
    if (id == "trace") return session.trace();
    if (id == "metzler") return session.metzler();
    if (id == "ltv") return ltv_bounds(sys, session.config());
    if (id == "network_measure") return session.network_measure();
    if (id == "network_metzler") return session.network_metzler();
    if (id == "measure_t1_inf") return session.measure_t1(Norm::Inf);
    if (id == "measure_t1_one") return session.measure_t1(Norm::One);
    if (id == "measure_t1_two") return session.measure_t1(Norm::Two);
    if (id == "network_measure_t1") return session.network_measure_t1();
    if (id == "network_metzler_t1") return session.network_metzler_t1();
    if (id.rfind("superset_", 0) == 0) {
        if (!superset) throw PreconditionError(id + " needs a [superset] box");
        const Norm p = parse_norm(id.substr(9));
        const auto& cfg = session.config();
        bool time_varying = false;
        for (int i = 0; i < sys.dimension(); ++i)
            for (int j = 0; j < sys.dimension(); ++j) time_varying |= sys.jacobian_entry(i, j).depends_on(0);
        std::vector<double> times{sys.t0()};
        if (time_varying) {
            const double t0 = sys.t0();
            const double ta = t0 + (1.0 - cfg.tail_fraction) * (cfg.t_max - t0);
            times = make_time_grid(ta, cfg.t_max, (cfg.t_max - ta) / 400.0, sys.breakpoints()).times;
        }
        auto r = upper_bound_superset(sys, *superset, p, times);
        r.config = cfg;
        return r;
    }
    throw PreconditionError("unknown result id '" + id + "'");
}

// ---------------------------------------------------------------------------
// Serialization

std::string bound_csv_header()
{
    return "result_id,bound,mu_hat,chi_check,spabs,t_max,dt,tail_fraction,ensemble,combos,seed,qualifiers\r\n";
}

namespace {

std::string optional_real(const std::optional<double>& v)
{
    return v ? format_real(*v) : std::string();
}

std::string joined_qualifiers(const BoundReport& r)
{
    std::string q;
    for (const auto& s : r.qualifiers) {
        if (!q.empty()) q += ';';
        q += s;
    }
    return q;
}

}  // namespace

std::string bound_csv_row(const BoundReport& r)
{
    const std::vector<std::string> fields{csv_field(r.result_id),
                                          format_real(r.bound),
                                          optional_real(r.mu_hat),
                                          optional_real(r.chi_check),
                                          optional_real(r.spabs),
                                          format_real(r.config.t_max),
                                          format_real(r.config.dt),
                                          format_real(r.config.tail_fraction),
                                          std::to_string(r.config.ensemble),
                                          std::to_string(r.config.combos),
                                          std::to_string(r.config.seed),
                                          csv_field(joined_qualifiers(r))};
    return csv_row(fields);
}

std::string bound_key_values(const BoundReport& r)
{
    std::string out;
    auto line = [&](const std::string& k, const std::string& v) { out += k + "=" + v + "\n"; };
    line("result_id", r.result_id);
    line("bound", format_real(r.bound));
    if (r.mu_hat) line("mu_hat", format_real(*r.mu_hat));
    if (r.chi_check) line("chi_check", format_real(*r.chi_check));
    if (r.spabs) line("spabs", format_real(*r.spabs));
    for (Eigen::Index i = 0; i < r.metzler.rows(); ++i)
        for (Eigen::Index j = 0; j < r.metzler.cols(); ++j)
            line("metzler[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]", format_real(r.metzler(i, j)));
    for (const auto& [k, v] : r.intermediates) line(k, format_real(v));
    line("t_max", format_real(r.config.t_max));
    line("dt", format_real(r.config.dt));
    line("tail_fraction", format_real(r.config.tail_fraction));
    line("ensemble", std::to_string(r.config.ensemble));
    line("combos", std::to_string(r.config.combos));
    line("seed", std::to_string(r.config.seed));
    line("qualifiers", joined_qualifiers(r));
    return out;
}

}  // namespace entrobound
