#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace entrobound {

/// Finite-horizon stand-in for the limits in the bound formulas.
struct HorizonConfig {
    double t_max = 20.0;
    double dt = 1e-3;
    /// Fraction of [t0, t_max] treated as "t -> infinity".
    double tail_fraction = 0.25;
    int ensemble = 16;
    int combos = 32;
    std::uint64_t seed = 1;
    /// Candidate reinitialization times; empty selects a default ladder.
    std::vector<double> t1_list;
};

struct EmpiricalConfig {
    std::vector<double> eps{1e-2, 3e-3, 1e-3};
    std::vector<double> horizons{4.0, 6.0, 8.0};
    /// Candidate spacing is eps_min / (resolution * L_i) per axis, where L_i
    /// is the largest stretch of axis i over the horizon (n = 2 only).
    double resolution = 4.0;
    /// Preferred candidate count; resolution is raised towards it.
    std::size_t candidate_budget = 250000;
    std::size_t max_candidates = 1000000;
    /// Number of stored time samples per horizon for the trajectory metric.
    int metric_samples = 32;
};

struct VerifyConfig {
    /// Relative slack: a check passes when lhs <= rhs + slack * (1 + rhs).
    double slack = 1e-6;
    double horizon = 2.0;
    int pairs = 100;
    int mc_samples = 20000;
    std::optional<double> t1;
};

}  // namespace entrobound
