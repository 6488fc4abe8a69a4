#pragma once

// Line-oriented `key = value` system description with [section] headers.
//
//   [system]       n, t0, f1..fn, breakpoints
//   [initial_set]  lower, upper
//   [partition]    blocks, local_norms, network_norm
//   [horizon]      t_max, dt, tail_fraction, t1_list
//   [sampling]     ensemble, convex_combos, seed
//   [bounds]       results, norm
//   [empirical]    eps, horizons, resolution, candidate_budget, max_candidates
//   [verify]       slack, T, pairs, mc_samples, t1
//   [superset]     lower, upper
//
// Lists are comma separated. '#' starts a comment. Errors are ParseError
// with a byte offset into the file.

#include "entrobound/config.hpp"
#include "entrobound/norm.hpp"
#include "entrobound/system.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace entrobound {

struct SpecFile {
    System system;  // carries K, t0 and the partition
    std::vector<std::string> fields;
    HorizonConfig horizon;
    EmpiricalConfig empirical;
    VerifyConfig verify;
    std::vector<std::string> results;
    Norm norm = Norm::Inf;
    std::optional<BoxSet> superset;

    [[nodiscard]] const BoxSet& initial_set() const noexcept { return system.initial_set(); }
    [[nodiscard]] double t0() const noexcept { return system.t0(); }
};

[[nodiscard]] SpecFile parse_spec(std::string_view text);
[[nodiscard]] SpecFile load_spec(const std::filesystem::path& path);

/// Comma-separated reals; throws ParseError at `base` + position.
[[nodiscard]] std::vector<double> parse_real_list(std::string_view text, std::size_t base = 0);

}  // namespace entrobound
