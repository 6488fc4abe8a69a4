#pragma once

#include <cstdint>
#include <string_view>

namespace entrobound {

/// Vector norm on R^k, also naming the induced matrix norm and matrix measure.
enum class Norm : std::uint8_t { One, Two, Inf };

/// Accepts "1"/"one", "2"/"two", "inf"/"infinity".
[[nodiscard]] Norm parse_norm(std::string_view text);
[[nodiscard]] std::string_view norm_name(Norm p);

}  // namespace entrobound
