#include "rebar/common.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace rebar {

std::string format_number(double v) {
  if (std::isnan(v)) return "NaN";
  if (v == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_fixed(double v, int decimals) {
  if (std::isnan(v)) return "NaN";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  std::string s(buf);
  if (s.size() > 1 && s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string to_text(const Scalar& s) {
  if (const auto* d = std::get_if<double>(&s)) return format_number(*d);
  return std::get<std::string>(s);
}

bool parse_number(std::string_view token, double& out) {
  if (token.empty()) return false;
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (*begin == '+') ++begin;
  double v = 0;
  auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) return false;
  out = v;
  return true;
}

json scalar_to_json(const Scalar& s) {
  if (const auto* d = std::get_if<double>(&s)) return *d;
  return std::get<std::string>(s);
}

Scalar scalar_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  fail("parameter value must be a number or a string");
}

json params_to_json(const ParamMap& params) {
  json j = json::object();
  for (const auto& [k, v] : params) j[k] = scalar_to_json(v);
  return j;
}

ParamMap params_from_json(const json& j) {
  if (!j.is_object()) fail("params must be an object");
  ParamMap out;
  for (const auto& [k, v] : j.items()) out[k] = scalar_from_json(v);
  return out;
}

double round_to(double v, int decimals) {
  if (!std::isfinite(v)) return v;
  const double scale = std::pow(10.0, decimals);
  double r = std::round(v * scale) / scale;
  return r == 0.0 ? 0.0 : r;
}

json score_to_json(double v) {
  if (std::isnan(v)) return "NaN";
  return round_to(v, 4);
}

double score_from_json(const json& j) {
  if (j.is_string() && j.get<std::string>() == "NaN") return std::numeric_limits<double>::quiet_NaN();
  if (j.is_number()) return j.get<double>();
  fail("score must be a number or \"NaN\"");
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_io("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail_io("cannot write file: " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail_io("write failed: " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) fail_io("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string trim(std::string_view text) {
  const auto* ws = " \t\r\n";
  auto b = text.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = text.find_last_not_of(ws);
  return std::string(text.substr(b, e - b + 1));
}

}  // namespace rebar
