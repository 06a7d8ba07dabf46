#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace sigverify {

// Shortest decimal text that parses back to the identical binary64 value.
std::string format_double(double value);

// Strict parse: the whole string must be consumed and the value finite.
std::optional<double> parse_double(std::string_view text);

}  // namespace sigverify
