#pragma once

// Fixed-step RK4 trajectories, the variational equation, and ensembles of
// solutions started in a box.

#include "entrobound/measures.hpp"
#include "entrobound/system.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace entrobound {

inline constexpr double kBlowUpLimit = 1e12;

/// Integration nodes t0 + k*dt plus every breakpoint and extra node inside
/// (t0, t_end), plus t_end itself. `is_break[k]` marks breakpoint nodes.
struct TimeGrid {
    std::vector<double> times;
    std::vector<char> is_break;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    /// Index of the node closest to t.
    [[nodiscard]] std::size_t index_of(double t) const;
};

[[nodiscard]] TimeGrid make_time_grid(double t0, double t_end, double dt, std::span<const double> breakpoints,
                                      std::span<const double> extra_nodes = {});

struct Trajectory {
    double t0 = 0.0;
    int n = 0;
    std::vector<double> times;
    std::vector<double> states;  // row k holds the state at times[k]

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    [[nodiscard]] std::span<const double> state(std::size_t k) const
    {
        return {states.data() + k * static_cast<std::size_t>(n), static_cast<std::size_t>(n)};
    }
};

struct VariationalSolution {
    Trajectory trajectory;
    std::vector<Matrix> phi;      // Phi(t_k), Phi(t0) = I
    std::vector<double> log_det;  // integral of tr J, zero at t0
};

/// One RK4 step from (t, x) to t + h. Stage times touching a breakpoint are
/// nudged inside the step so each step sees a single branch of f.
void rk4_step(const System& sys, double t, double h, std::span<const double> x, std::span<double> out,
              bool start_is_break = false, bool end_is_break = false);

[[nodiscard]] Trajectory integrate(const System& sys, std::span<const double> x0, double t_end, double dt);

/// Integrates over grid.times[first..] starting from x at grid.times[first].
/// Throws BlowUpError carrying `origin` as the offending initial state.
[[nodiscard]] std::vector<double> integrate_on_grid(const System& sys, const TimeGrid& grid, std::size_t first,
                                                    std::span<const double> x, std::span<const double> origin);

/// Integrates backwards in time from (t_from, y) to t_to with step dt.
[[nodiscard]] std::vector<double> integrate_backward(const System& sys, std::span<const double> y, double t_from,
                                                     double t_to, double dt);

[[nodiscard]] VariationalSolution variational(const System& sys, std::span<const double> x0, double t_end,
                                              double dt);

/// Solutions from a common set of initial states on a shared grid.
struct ReachEnsemble {
    TimeGrid grid;
    int n = 0;
    std::vector<std::vector<double>> initial_states;
    std::vector<std::vector<double>> states;  // states[m] is row-major over the grid

    [[nodiscard]] std::size_t members() const noexcept { return states.size(); }
    [[nodiscard]] std::span<const double> state(std::size_t member, std::size_t k) const
    {
        return {states[member].data() + k * static_cast<std::size_t>(n), static_cast<std::size_t>(n)};
    }
};

/// Initial states: the 2^n corners, the center, then shifted Halton points.
/// The list for a smaller count is a prefix of the list for a larger one.
[[nodiscard]] std::vector<std::vector<double>> ensemble_initial_states(const BoxSet& k, int count,
                                                                       std::uint64_t seed);

[[nodiscard]] ReachEnsemble sample_ensemble(const System& sys, const BoxSet& k, int count, double t_end, double dt,
                                            std::uint64_t seed, std::span<const double> extra_nodes = {});

/// Integrates the given initial states over grid.times[first..]; rows before
/// `first` are filled with the initial state.
[[nodiscard]] ReachEnsemble propagate(const System& sys, const TimeGrid& grid, std::size_t first,
                                      std::vector<std::vector<double>> initial_states);

/// A convex combination of up to four ensemble members.
struct HullCombo {
    int count = 0;
    std::array<int, 4> member{};
    std::array<double, 4> weight{};
};

/// `combos` random combinations with Dirichlet(1) weights over 2..4 distinct
/// members drawn from the first `pool` members. Deterministic in
/// (seed, t_index); the first k combos do not depend on `combos`.
[[nodiscard]] std::vector<HullCombo> hull_combos(int pool, int combos, std::uint64_t seed, std::uint64_t t_index);

void apply_combo(const ReachEnsemble& ens, std::size_t k, const HullCombo& c, std::span<double> out);

/// Member states at t_index followed by `combos` convex combinations of them.
[[nodiscard]] std::vector<std::vector<double>> convex_hull_samples(const ReachEnsemble& ens, std::size_t t_index,
                                                                   int combos, std::uint64_t seed);

/// Number of members that combinations are drawn from (corners and center).
[[nodiscard]] int combo_pool(const ReachEnsemble& ens);

}  // namespace entrobound
