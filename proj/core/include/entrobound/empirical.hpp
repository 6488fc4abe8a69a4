#pragma once

// Counting estimates of topological entropy from (T, eps)-spanning and
// (T, eps)-separated sets, and numerical checks of the supporting lemmas.
//
// Distances are d_T(x, y) = max over grid times in [t0, t0 + T] of
// |xi(t, t0, x) - xi(t, t0, y)|_inf.
//
// n = 1: solutions of a scalar ODE preserve order, so greedy sweeps from the
// left end of K are optimal and need only the step function
// Delta(x) = inf{d > 0 : d_T(x, x + d) >= eps}. Small counts are swept step
// by step; large ones are the floor of the integral of 1/Delta (packing) or
// 1/(2 Delta) (cover), plus one, and carry an uncertainty.
//
// n = 2: greedy packing and lazy greedy set cover over a lattice of
// candidates G(theta) in K.

#include "entrobound/config.hpp"
#include "entrobound/system.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace entrobound {

struct Grid {
    std::vector<double> center;
    std::vector<double> theta;
    std::vector<int> counts;                  // points per axis
    std::vector<int> first;                   // lowest lattice index per axis
    std::vector<std::vector<double>> points;  // axis 0 varies fastest
};

/// All points center + (k_1 theta_1, ..., k_n theta_n) inside K.
[[nodiscard]] Grid build_grid(const BoxSet& k, std::span<const double> theta, std::span<const double> center);

struct Count {
    std::int64_t value = 0;
    /// Zero for counts produced by an explicit construction.
    std::int64_t uncertainty = 0;
};

struct EntropyRow {
    double eps = 0.0;
    double horizon = 0.0;
    Count span;        // S~(eps, T)
    Count sep;         // N~(eps, T)
    Count sep_double;  // N~(2 eps, T)
};

struct EntropyEstimate {
    std::vector<double> eps;
    std::vector<double> horizons;
    std::vector<EntropyRow> rows;  // eps-major, in list order
    std::vector<double> span_slope;
    std::vector<double> sep_slope;
    double estimate = 0.0;
    double band = 0.0;
    /// Candidate count per run (n = 2) or 0 for the n = 1 sweep.
    std::size_t candidates = 0;

    [[nodiscard]] const EntropyRow& row(std::size_t e, std::size_t t) const { return rows[e * horizons.size() + t]; }
};

/// Size of a greedy (T, eps)-spanning set; an upper proxy for the minimum.
[[nodiscard]] Count greedy_spanning_count(const System& sys, const BoxSet& k, double eps, double horizon, double t0,
                                          double dt = 1e-3, double resolution = 4.0);

/// Size of a greedy (T, eps)-separated set; a lower proxy for the maximum.
[[nodiscard]] Count greedy_separated_count(const System& sys, const BoxSet& k, double eps, double horizon, double t0,
                                           double dt = 1e-3, double resolution = 4.0);

/// Counts over the eps x horizon table and least-squares slopes of
/// log(count) against T. The headline is the separated slope at the
/// smallest eps; the band is the largest deviation of any slope from it.
/// Counts are made consistent by taking, for N~, the largest packing among
/// configurations with eps' >= eps and T' <= T, and for S~ the smallest
/// cover (or maximal packing) among configurations with eps' <= eps and
/// T' >= T; every such set is valid for (eps, T).
[[nodiscard]] EntropyEstimate estimate_entropy(const System& sys, const BoxSet& k, double t0,
                                               const EmpiricalConfig& cfg, double dt = 1e-3);

/// Least-squares slope of log(count) against horizon.
[[nodiscard]] double log_slope(std::span<const double> horizons, std::span<const double> counts);

/// RFC 4180 table with columns eps,T,span_count,sep_count,span_slope,sep_slope,estimate,band.
[[nodiscard]] std::string entropy_csv(const EntropyEstimate& e);

}  // namespace entrobound
