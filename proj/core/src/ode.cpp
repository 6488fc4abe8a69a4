#include "entrobound/ode.hpp"

#include "entrobound/error.hpp"
#include "entrobound/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace entrobound {

// ---------------------------------------------------------------------------
// Time grid

std::size_t TimeGrid::index_of(double t) const
{
    if (times.empty()) throw PreconditionError("empty time grid");
    auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end()) return times.size() - 1;
    auto k = static_cast<std::size_t>(it - times.begin());
    if (k > 0 && t - times[k - 1] < times[k] - t) --k;
    return k;
}

TimeGrid make_time_grid(double t0, double t_end, double dt, std::span<const double> breakpoints,
                        std::span<const double> extra_nodes)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) throw PreconditionError("time step must be positive");
    if (!(t_end >= t0)) throw PreconditionError("t_end precedes t0");
    struct Node {
        double t;
        char fixed;  // 0 nominal, 1 extra, 2 breakpoint
    };
    std::vector<Node> nodes;
    const auto steps = static_cast<std::size_t>(std::floor((t_end - t0) / dt * (1.0 + 1e-12)));
    nodes.reserve(steps + 2 + breakpoints.size() + extra_nodes.size());
    for (std::size_t k = 0; k <= steps; ++k) nodes.push_back({t0 + static_cast<double>(k) * dt, 0});
    if (t_end - nodes.back().t > 1e-9 * dt) nodes.push_back({t_end, 0});
    else nodes.back().t = t_end;
    for (double b : breakpoints)
        if (b > t0 && b < t_end) nodes.push_back({b, 2});
    for (double e : extra_nodes)
        if (e > t0 && e < t_end) nodes.push_back({e, 1});
    std::stable_sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.t < b.t; });

    // Nominal nodes that nearly coincide with a fixed node are dropped so no
    // degenerate steps appear; fixed nodes keep their exact value.
    const double merge = 1e-7 * dt;
    TimeGrid grid;
    for (const auto& node : nodes) {
        if (!grid.times.empty() && node.t - grid.times.back() <= merge) {
            const bool first_or_last = grid.times.size() == 1 || node.t == t_end;
            if (node.fixed && !first_or_last) {
                grid.times.back() = node.t;
                grid.is_break.back() = static_cast<char>(grid.is_break.back() || node.fixed == 2);
            } else if (node.fixed == 2) {
                grid.is_break.back() = 1;
            }
            continue;
        }
        grid.times.push_back(node.t);
        grid.is_break.push_back(node.fixed == 2 ? 1 : 0);
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Stepping

namespace {

void check_finite(std::span<const double> x, double t, std::span<const double> origin)
{
    for (double v : x) {
        if (!std::isfinite(v) || std::fabs(v) > kBlowUpLimit) {
            throw BlowUpError("solution left the representable range (|x| > 1e12) at t = " + std::to_string(t),
                              t, std::vector<double>(origin.begin(), origin.end()));
        }
    }
}

double stage_start(double t, double h, bool is_break)
{
    return is_break ? std::nextafter(t, t + h) : t;
}

double stage_end(double t, double h, bool is_break)
{
    return is_break ? std::nextafter(t + h, t) : t + h;
}

}  // namespace

void rk4_step(const System& sys, double t, double h, std::span<const double> x, std::span<double> out,
              bool start_is_break, bool end_is_break)
{
    const std::size_t n = x.size();
    std::vector<double> buf(5 * n);
    std::span<double> k1(buf.data(), n), k2(buf.data() + n, n), k3(buf.data() + 2 * n, n),
        k4(buf.data() + 3 * n, n), y(buf.data() + 4 * n, n);
    sys.eval_field(stage_start(t, h, start_is_break), x, k1);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + 0.5 * h * k1[i];
    sys.eval_field(t + 0.5 * h, y, k2);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + 0.5 * h * k2[i];
    sys.eval_field(t + 0.5 * h, y, k3);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + h * k3[i];
    sys.eval_field(stage_end(t, h, end_is_break), y, k4);
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

std::vector<double> integrate_on_grid(const System& sys, const TimeGrid& grid, std::size_t first,
                                      std::span<const double> x, std::span<const double> origin)
{
    const std::size_t n = x.size();
    if (static_cast<int>(n) != sys.dimension()) throw PreconditionError("state size does not match the system");
    if (first >= grid.size()) throw PreconditionError("start index outside the grid");
    std::vector<double> states(grid.size() * n);
    for (std::size_t k = 0; k <= first; ++k) std::copy(x.begin(), x.end(), states.begin() + static_cast<long>(k * n));
    check_finite(x, grid.times[first], origin);
    for (std::size_t k = first; k + 1 < grid.size(); ++k) {
        const double t = grid.times[k];
        const double h = grid.times[k + 1] - t;
        std::span<const double> cur(states.data() + k * n, n);
        std::span<double> next(states.data() + (k + 1) * n, n);
        try {
            rk4_step(sys, t, h, cur, next, grid.is_break[k], grid.is_break[k + 1]);
        } catch (const DomainError& e) {
            throw BlowUpError(std::string("non-finite derivative: ") + e.what() + " at t = " + std::to_string(t), t,
                              std::vector<double>(origin.begin(), origin.end()));
        }
        check_finite(next, grid.times[k + 1], origin);
    }
    return states;
}

Trajectory integrate(const System& sys, std::span<const double> x0, double t_end, double dt)
{
    Trajectory tr;
    tr.t0 = sys.t0();
    tr.n = sys.dimension();
    const auto grid = make_time_grid(sys.t0(), t_end, dt, sys.breakpoints());
    tr.states = integrate_on_grid(sys, grid, 0, x0, x0);
    tr.times = grid.times;
    return tr;
}

std::vector<double> integrate_backward(const System& sys, std::span<const double> y, double t_from, double t_to,
                                       double dt)
{
    if (t_to > t_from) throw PreconditionError("backward integration needs t_to <= t_from");
    const auto grid = make_time_grid(t_to, t_from, dt, sys.breakpoints());
    std::vector<double> x(y.begin(), y.end()), next(y.size());
    for (std::size_t k = grid.size() - 1; k > 0; --k) {
        const double t = grid.times[k];
        const double h = grid.times[k - 1] - t;
        try {
            rk4_step(sys, t, h, x, next, grid.is_break[k], grid.is_break[k - 1]);
        } catch (const DomainError& e) {
            throw BlowUpError(std::string("non-finite derivative: ") + e.what(), t, x);
        }
        check_finite(next, grid.times[k - 1], y);
        x.swap(next);
    }
    return x;
}

// ---------------------------------------------------------------------------
// Variational equation

VariationalSolution variational(const System& sys, std::span<const double> x0, double t_end, double dt)
{
    const int n = sys.dimension();
    if (static_cast<int>(x0.size()) != n) throw PreconditionError("state size does not match the system");
    const auto grid = make_time_grid(sys.t0(), t_end, dt, sys.breakpoints());
    const auto un = static_cast<std::size_t>(n);
    const std::size_t width = un + un * un + 1;  // x, Phi (column-major), log det

    VariationalSolution sol;
    sol.trajectory.t0 = sys.t0();
    sol.trajectory.n = n;
    sol.trajectory.times = grid.times;
    sol.trajectory.states.resize(grid.size() * un);

    std::vector<double> z(width, 0.0);
    std::copy(x0.begin(), x0.end(), z.begin());
    for (int i = 0; i < n; ++i) z[un + static_cast<std::size_t>(i * n + i)] = 1.0;

    Matrix jac;
    auto rhs = [&](double t, const std::vector<double>& s, std::vector<double>& d) {
        std::span<const double> x(s.data(), un);
        sys.eval_field(t, x, std::span<double>(d.data(), un));
        sys.eval_jacobian(t, x, jac);
        Eigen::Map<const Matrix> phi(s.data() + un, n, n);
        Eigen::Map<Matrix> dphi(d.data() + un, n, n);
        dphi.noalias() = jac * phi;
        d[width - 1] = jac.trace();
    };

    auto record = [&](std::size_t k) {
        std::copy(z.begin(), z.begin() + n, sol.trajectory.states.begin() + static_cast<long>(k * un));
        sol.phi.push_back(Eigen::Map<const Matrix>(z.data() + un, n, n));
        sol.log_det.push_back(z[width - 1]);
    };
    check_finite(x0, grid.times[0], x0);
    record(0);

    std::vector<double> k1(width), k2(width), k3(width), k4(width), y(width);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double t = grid.times[k];
        const double h = grid.times[k + 1] - t;
        try {
            rhs(stage_start(t, h, grid.is_break[k]), z, k1);
            for (std::size_t i = 0; i < width; ++i) y[i] = z[i] + 0.5 * h * k1[i];
            rhs(t + 0.5 * h, y, k2);
            for (std::size_t i = 0; i < width; ++i) y[i] = z[i] + 0.5 * h * k2[i];
            rhs(t + 0.5 * h, y, k3);
            for (std::size_t i = 0; i < width; ++i) y[i] = z[i] + h * k3[i];
            rhs(stage_end(t, h, grid.is_break[k + 1]), y, k4);
        } catch (const DomainError& e) {
            throw BlowUpError(std::string("non-finite derivative: ") + e.what(), t,
                              std::vector<double>(x0.begin(), x0.end()));
        }
        for (std::size_t i = 0; i < width; ++i) z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        check_finite(std::span<const double>(z.data(), un), grid.times[k + 1], x0);
        record(k + 1);
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Ensembles

namespace {

double radical_inverse(std::uint64_t i, unsigned base)
{
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += static_cast<double>(i % base) * f;
        i /= base;
        f *= inv;
    }
    return r;
}

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(tag)};
    return std::mt19937_64(seq);
}

double unit(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<std::vector<double>> ensemble_initial_states(const BoxSet& k, int count, std::uint64_t seed)
{
    const int n = k.dimension();
    if (count < 2) throw PreconditionError("ensemble needs at least two members");
    if (n > 16) throw PreconditionError("ensembles are limited to n <= 16");
    std::vector<std::vector<double>> out;
    const unsigned corners = 1u << n;
    for (unsigned c = 0; c < corners; ++c) out.push_back(k.corner(c));
    out.push_back(k.center());

    auto rng = make_rng(seed, 0, 0x4a17);
    std::vector<double> shift(static_cast<std::size_t>(n));
    for (auto& s : shift) s = unit(rng);
    for (std::uint64_t i = 1; static_cast<int>(out.size()) < count; ++i) {
        std::vector<double> p(static_cast<std::size_t>(n));
        for (int d = 0; d < n; ++d) {
            double u = radical_inverse(i, kPrimes[d]) + shift[static_cast<std::size_t>(d)];
            u -= std::floor(u);
            p[static_cast<std::size_t>(d)] = k.lower()[static_cast<std::size_t>(d)] + u * k.width(d);
        }
        out.push_back(std::move(p));
    }
    return out;
}

ReachEnsemble propagate(const System& sys, const TimeGrid& grid, std::size_t first,
                        std::vector<std::vector<double>> initial_states)
{
    ReachEnsemble ens;
    ens.grid = grid;
    ens.n = sys.dimension();
    ens.states.resize(initial_states.size());
    parallel_for(initial_states.size(), [&](std::size_t m) {
        ens.states[m] = integrate_on_grid(sys, grid, first, initial_states[m], initial_states[m]);
    });
    ens.initial_states = std::move(initial_states);
    return ens;
}

ReachEnsemble sample_ensemble(const System& sys, const BoxSet& k, int count, double t_end, double dt,
                              std::uint64_t seed, std::span<const double> extra_nodes)
{
    if (k.dimension() != sys.dimension()) throw PreconditionError("initial set dimension mismatch");
    const auto grid = make_time_grid(sys.t0(), t_end, dt, sys.breakpoints(), extra_nodes);
    return propagate(sys, grid, 0, ensemble_initial_states(k, count, seed));
}

std::vector<HullCombo> hull_combos(int pool, int combos, std::uint64_t seed, std::uint64_t t_index)
{
    std::vector<HullCombo> out;
    if (combos <= 0 || pool <= 0) return out;
    auto rng = make_rng(seed, t_index, 0xc0b0);
    out.reserve(static_cast<std::size_t>(combos));
    std::vector<int> idx(static_cast<std::size_t>(pool));
    for (int c = 0; c < combos; ++c) {
        HullCombo h;
        const int want = 2 + static_cast<int>(rng() % 3);
        h.count = std::min(want, pool);
        for (int i = 0; i < pool; ++i) idx[static_cast<std::size_t>(i)] = i;
        double total = 0.0;
        for (int j = 0; j < h.count; ++j) {
            const auto pick = j + static_cast<int>(rng() % static_cast<std::uint64_t>(pool - j));
            std::swap(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(pick)]);
            h.member[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j)];
            const double w = -std::log1p(-unit(rng));
            h.weight[static_cast<std::size_t>(j)] = w;
            total += w;
        }
        for (int j = 0; j < h.count; ++j) {
            auto& w = h.weight[static_cast<std::size_t>(j)];
            w = total > 0.0 ? w / total : 1.0 / h.count;
        }
        out.push_back(h);
    }
    return out;
}

void apply_combo(const ReachEnsemble& ens, std::size_t k, const HullCombo& c, std::span<double> out)
{
    std::fill(out.begin(), out.end(), 0.0);
    for (int j = 0; j < c.count; ++j) {
        const auto s = ens.state(static_cast<std::size_t>(c.member[static_cast<std::size_t>(j)]), k);
        const double w = c.weight[static_cast<std::size_t>(j)];
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * s[i];
    }
}

int combo_pool(const ReachEnsemble& ens)
{
    const auto base = (std::size_t{1} << ens.n) + 1;
    return static_cast<int>(std::min(ens.members(), base));
}

std::vector<std::vector<double>> convex_hull_samples(const ReachEnsemble& ens, std::size_t t_index, int combos,
                                                     std::uint64_t seed)
{
    if (combos < 0) throw PreconditionError("combos must be nonnegative");
    if (t_index >= ens.grid.size()) throw PreconditionError("time index outside the grid");
    std::vector<std::vector<double>> out;
    for (std::size_t m = 0; m < ens.members(); ++m) {
        const auto s = ens.state(m, t_index);
        out.emplace_back(s.begin(), s.end());
    }
    for (const auto& c : hull_combos(combo_pool(ens), combos, seed, t_index)) {
        std::vector<double> p(static_cast<std::size_t>(ens.n));
        apply_combo(ens, t_index, c, p);
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace entrobound
