#include "slh/text.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "slh/error.hpp"

namespace slh {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  const std::string buf(s);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || errno == ERANGE || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<Complex> parse_complex(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.back() != 'i') {
    auto re = parse_real(s);
    if (!re) return std::nullopt;
    return Complex(*re, 0.0);
  }
  const std::string_view body = s.substr(0, s.size() - 1);
  // Split at the last sign that is not the leading sign or an exponent sign.
  for (std::size_t k = body.size(); k-- > 1;) {
    const char c = body[k];
    if ((c == '+' || c == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      auto re = parse_real(body.substr(0, k));
      auto im = parse_real(body.substr(k));
      if (!re || !im) return std::nullopt;
      return Complex(*re, *im);
    }
  }
  auto im = body.empty() || body == "+" ? std::optional<double>(1.0)
            : body == "-"               ? std::optional<double>(-1.0)
                                        : parse_real(body);
  if (!im) return std::nullopt;
  return Complex(0.0, *im);
}

namespace {

// Shortest %g spelling that reads back to the same double.
std::string shortest(double v, bool plus) {
  char buf[40];
  for (int digits = 15; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, plus ? "%+.*g" : "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace

std::string format_real(double v) { return shortest(v, false); }

std::string format_complex_literal(Complex c) {
  if (c.imag() == 0.0) return shortest(c.real(), false);
  if (c.real() == 0.0) return shortest(c.imag(), false) + "i";
  return shortest(c.real(), false) + shortest(c.imag(), true) + "i";
}

std::vector<KeyValue> parse_key_values(std::string_view text) {
  std::vector<KeyValue> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw InputError("line " + std::to_string(line_no) + ": expected key=value");
    KeyValue kv{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), line_no};
    if (kv.key.empty()) throw InputError("line " + std::to_string(line_no) + ": empty key");
    out.push_back(std::move(kv));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace slh
