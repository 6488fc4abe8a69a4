#pragma once

// Numerical checks of the lemmas behind the bounds. Every check compares
// lhs <= rhs + slack * (1 + rhs) and counts violations.

#include "entrobound/config.hpp"
#include "entrobound/empirical.hpp"
#include "entrobound/system.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace entrobound {

struct CheckResult {
    CheckResult() = default;
    explicit CheckResult(std::string n) : name(std::move(n)) {}

    std::string name;
    std::int64_t checks = 0;
    std::int64_t violations = 0;
    /// Largest (lhs - rhs) / (1 + |rhs|) seen; negative when all hold with room.
    double worst = -1e300;
    std::string note;

    [[nodiscard]] bool passed() const noexcept { return violations == 0; }
    void record(double lhs, double rhs, double slack);
};

struct SeparationReport {
    CheckResult componentwise{"separation_componentwise"};
    CheckResult coppel_upper{"coppel_upper"};
    CheckResult coppel_lower{"coppel_lower"};
};

/// Random pairs (x, y) in K: componentwise comparison against
/// e^{A(t)(t - t0)} |x - y|_N with A the running maximum of the
/// interconnection matrix over hull samples and the segment [x, y], and the
/// global sandwich e^{eta_low} |x - y| <= |xi(t, y) - xi(t, x)| <= e^{eta} |x - y|
/// in the inf-norm.
[[nodiscard]] SeparationReport verify_separation_bounds(const System& sys, const BoxSet& k, double t0,
                                                        double horizon, int pairs, const HorizonConfig& hcfg,
                                                        double slack);

struct VolumeReport {
    double gamma = 0.0;
    double volume_k = 0.0;
    double estimate = 0.0;  // Monte Carlo volume of the reachable set
    double sigma = 0.0;
    double bound = 0.0;  // e^gamma vol(K)
    bool tight = false;
    CheckResult check{"volume"};
};

/// vol(xi(t0 + T, t0, K)) >= e^gamma vol(K), gamma = min over members of the
/// integral of tr J. Membership of a Monte Carlo point y is decided by
/// integrating backwards from (t0 + T, y) and testing whether it lands in K.
[[nodiscard]] VolumeReport verify_volume_bound(const System& sys, const BoxSet& k, double t0, double horizon,
                                               int mc_samples, const HorizonConfig& hcfg, double slack);

/// |det Phi(t) - e^{l(t)}| <= 1e-6 e^{l(t)} along every corner and the center.
[[nodiscard]] CheckResult verify_liouville(const System& sys, double t_end, double dt, double tolerance = 1e-6);

/// Random Metzler pairs A >= B of size m: |e^A|_N >= |e^B|_N and
/// mu_N(A) >= mu_N(B); nonnegative pairs: |A|_N >= |B|_N.
[[nodiscard]] CheckResult verify_metzler_monotonicity(int m, int pairs, std::uint64_t seed, double slack);

/// mu_G(J) <= mu_N(A_N(J)) on Jacobians sampled along an ensemble, with
/// inf local and network norms on the system's block sizes.
[[nodiscard]] CheckResult verify_block_domination(const System& sys, const HorizonConfig& hcfg, double slack);

struct InvarianceReport {
    EntropyEstimate from_t0;
    EntropyEstimate from_t1;
    BoxSet reach_box;
    double relative_gap = 0.0;
    CheckResult check{"initial_time"};
};

/// Estimates from (t0, K) and from (t1, bounding box of ensemble states at t1).
[[nodiscard]] InvarianceReport verify_initial_time_invariance(const System& sys, const BoxSet& k, double t0,
                                                              double t1, const HorizonConfig& hcfg,
                                                              const EmpiricalConfig& ecfg);

struct CoverMaxReport {
    EntropyEstimate whole;
    EntropyEstimate lower_half;
    EntropyEstimate upper_half;
    CheckResult check{"cover_max"};
};

[[nodiscard]] CoverMaxReport verify_cover_max(const System& sys, const BoxSet& k, double t0, int split_axis,
                                              const HorizonConfig& hcfg, const EmpiricalConfig& ecfg);

}  // namespace entrobound
