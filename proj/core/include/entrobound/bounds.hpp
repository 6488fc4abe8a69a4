#pragma once

// Closed-form entropy bounds evaluated on sampled reachable sets.
//
// limsup/liminf over t are replaced by the extremum over the tail window
// [t0 + (1 - tail_fraction)(t_max - t0), t_max]. Maxima over the convex hull
// of the reachable set are replaced by maxima over ensemble members and
// random convex combinations of them; around every local time-extremum of a
// member the objective is additionally maximized between grid nodes.

#include "entrobound/config.hpp"
#include "entrobound/measures.hpp"
#include "entrobound/ode.hpp"
#include "entrobound/system.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace entrobound {

inline constexpr const char* kSampledQualifier = "sampled max, not rigorous";
inline constexpr const char* kNonConvergedQualifier = "non-converged tail window";

struct BoundReport {
    std::string result_id;
    double bound = 0.0;
    std::optional<double> mu_hat;
    std::optional<double> chi_check;
    std::optional<double> spabs;
    /// The Metzler matrix whose abscissa gives the bound, if any.
    Matrix metzler;
    /// Further named numbers (per-t1 values, nested-window values, ...).
    std::vector<std::pair<std::string, double>> intermediates;
    HorizonConfig config;
    int n = 0;
    std::vector<std::string> qualifiers;

    [[nodiscard]] bool converged() const;
};

/// Every result id understood by compute_bound.
[[nodiscard]] const std::vector<std::string>& result_ids();

/// Default reinitialization times: t0 + 0.5 (t_max - t0) {1/16, 1/8, 1/4, 1/2, 1}.
[[nodiscard]] std::vector<double> default_t1_list(double t0, double t_max);

enum class Sense { Max, Min };

/// Scalar functions of the Jacobian tracked over time.
struct Objective {
    std::vector<Sense> sense;
    std::function<void(const Matrix& jac, std::span<double> out)> eval;
    bool use_combos = true;
};

/// Per-time extrema of an objective plus refined peak values.
class Sweep {
public:
    Sweep(std::size_t values, const TimeGrid& grid);

    /// Extremum of value v over all samples with time in [ta, tb].
    [[nodiscard]] double extremum(std::size_t v, Sense s, double ta, double tb) const;

    std::size_t values;
    const TimeGrid* grid;
    std::size_t k_from = 0, k_to = 0;
    std::vector<double> per_time;  // (k - k_from) * values + v
    struct Peak {
        double t;
        std::size_t value;
        double y;
    };
    std::vector<Peak> peaks;
};

/// Evaluates `obj` on every sample of `ens` at grid nodes k_from..k_to.
/// When `frozen`, member states are taken as constant in time.
[[nodiscard]] Sweep sweep_objective(const System& sys, const ReachEnsemble& ens, const Objective& obj,
                                    std::size_t k_from, std::size_t k_to, int combos, std::uint64_t seed,
                                    bool frozen = false);

/// Shares one ensemble across several bound computations.
class BoundSession {
public:
    BoundSession(const System& sys, const BoxSet& k, HorizonConfig cfg);

    [[nodiscard]] const ReachEnsemble& ensemble();
    [[nodiscard]] const HorizonConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] const std::vector<double>& t1_list() const noexcept { return t1_list_; }

    [[nodiscard]] BoundReport measure(Norm p);
    [[nodiscard]] BoundReport trace();
    [[nodiscard]] BoundReport metzler();
    [[nodiscard]] BoundReport network_measure();
    [[nodiscard]] BoundReport network_metzler();
    [[nodiscard]] BoundReport measure_t1(Norm p);
    [[nodiscard]] BoundReport network_measure_t1();
    [[nodiscard]] BoundReport network_metzler_t1();

private:
    struct Window {
        std::size_t k_from, k_to;
        double ta, ta_half, tb;
    };
    [[nodiscard]] Window tail_window() const;
    [[nodiscard]] BoundReport base_report(std::string id) const;
    [[nodiscard]] BoundReport scalar_max(std::string id, const Objective& obj);
    [[nodiscard]] BoundReport metzler_from(std::string id, const Objective& obj, int size);
    [[nodiscard]] BoundReport scalar_t1(std::string id, const Objective& obj);
    [[nodiscard]] const std::vector<ReachEnsemble>& reinitialized();

    System sys_;
    BoxSet k_;
    HorizonConfig cfg_;
    std::vector<double> t1_list_;
    std::optional<ReachEnsemble> ens_;
    std::optional<std::vector<ReachEnsemble>> reinit_;
};

[[nodiscard]] BoundReport upper_bound_measure(const System& sys, const BoxSet& k, Norm p, const HorizonConfig& cfg);
[[nodiscard]] BoundReport lower_bound_trace(const System& sys, const BoxSet& k, const HorizonConfig& cfg);
[[nodiscard]] BoundReport upper_bound_metzler_scalar(const System& sys, const BoxSet& k, const HorizonConfig& cfg);
[[nodiscard]] BoundReport upper_bound_network_measure(const System& sys, const BoxSet& k, const HorizonConfig& cfg);
[[nodiscard]] BoundReport upper_bound_network_metzler(const System& sys, const BoxSet& k, const HorizonConfig& cfg);
[[nodiscard]] BoundReport upper_bound_measure_t1(const System& sys, const BoxSet& k, Norm p,
                                                 const HorizonConfig& cfg);
[[nodiscard]] BoundReport upper_bound_network_metzler_t1(const System& sys, const BoxSet& k,
                                                         const HorizonConfig& cfg);
[[nodiscard]] BoundReport upper_bound_network_measure_t1(const System& sys, const BoxSet& k,
                                                         const HorizonConfig& cfg);

/// Linear time-varying systems: J is evaluated at x = 0 only. Reports the
/// mu_p bound as `bound` and the trace and Metzler bounds as intermediates.
/// Throws PreconditionError when J(t, x) differs from J(t, 0) by more than
/// `linear_tolerance` in the inf-norm on the probe points.
[[nodiscard]] BoundReport ltv_bounds(const System& sys, const HorizonConfig& cfg, Norm p = Norm::Inf,
                                     double linear_tolerance = 1e-9);

/// Max of mu_p(J) over a deterministic grid on S x t_grid; no integration.
[[nodiscard]] BoundReport upper_bound_superset(const System& sys, const BoxSet& s, Norm p,
                                               std::span<const double> t_grid, int points_per_axis = 0);

/// Dispatches on a result id from result_ids(). `superset` is required for
/// the superset_* ids.
[[nodiscard]] BoundReport compute_bound(BoundSession& session, const System& sys, const std::string& id,
                                        const std::optional<BoxSet>& superset = std::nullopt);

/// CSV header and row in the documented column order.
[[nodiscard]] std::string bound_csv_header();
[[nodiscard]] std::string bound_csv_row(const BoundReport& r);
/// Flat key=value text.
[[nodiscard]] std::string bound_key_values(const BoundReport& r);

}  // namespace entrobound
