#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace lbsgb {

/// %.17g: enough digits to round-trip any double.
std::string format_double(double x);

/// Strict parsers: the whole token must be consumed. Throw std::invalid_argument.
double parse_double(std::string_view text);
std::uint64_t parse_uint(std::string_view text);

std::string_view trim(std::string_view s) noexcept;

}  // namespace lbsgb
