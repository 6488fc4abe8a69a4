#pragma once

#include <span>
#include <string>
#include <string_view>

namespace entrobound {

/// 17 significant digits, '.' decimal separator, "nan"/"inf" spelled out.
[[nodiscard]] std::string format_real(double v);

/// Quotes a field when it contains a comma, quote, CR or LF (RFC 4180).
[[nodiscard]] std::string csv_field(std::string_view s);

/// Joins already formatted fields and appends CRLF.
[[nodiscard]] std::string csv_row(std::span<const std::string> fields);

}  // namespace entrobound
