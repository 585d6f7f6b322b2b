#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "slh/operator_algebra.hpp"

namespace slh {

std::string_view trim(std::string_view s);

// Full-string numeric parses; nullopt on any trailing garbage.
std::optional<double> parse_real(std::string_view s);
// Accepts "1.5", "-2i", "0.3+0.1i", "1e-3-4e-2i".
std::optional<Complex> parse_complex(std::string_view s);

// Shortest decimal text that reads back to the same double.
std::string format_real(double v);

// Round-trippable text for a complex literal ("0.3+0.1i", "-2", "1i").
std::string format_complex_literal(Complex c);

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

// One key=value per line; blank lines and '#' comments are skipped.
// Throws InputError naming the line for anything else.
std::vector<KeyValue> parse_key_values(std::string_view text);

std::string read_file(const std::string& path);

}  // namespace slh
