#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace rebar {

using json = nlohmann::json;
using NodeId = std::string;

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
  Validation = 2,
  Unsatisfiable = 3,
  Io = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(const std::string& what) { throw Error(ErrorKind::Validation, what); }
[[noreturn]] inline void fail_io(const std::string& what) { throw Error(ErrorKind::Io, what); }

/// A scenario parameter value: a number or a bare word ("N", "clear").
using Scalar = std::variant<double, std::string>;
using ParamMap = std::map<std::string, Scalar>;

inline bool is_number(const Scalar& s) { return std::holds_alternative<double>(s); }

/// Shortest text that round-trips the value; integers print without a fraction.
std::string to_text(const Scalar& s);
std::string format_number(double v);
/// Fixed-point text with `decimals` places, used where output must be byte-stable.
std::string format_fixed(double v, int decimals);

/// Parses the whole token as a finite number, or returns false.
bool parse_number(std::string_view token, double& out);

json scalar_to_json(const Scalar& s);
Scalar scalar_from_json(const json& j);
json params_to_json(const ParamMap& params);
ParamMap params_from_json(const json& j);

/// Rounds to `decimals` places; NaN passes through.
double round_to(double v, int decimals);

/// Score values: NaN is written as the string "NaN", numbers rounded to 4 places.
json score_to_json(double v);
double score_from_json(const json& j);

/// 64-bit FNV-1a, used for stable ids and bucket keys.
std::uint64_t fnv1a64(std::string_view text);
std::string hex64(std::uint64_t v);

std::string read_file(const std::string& path);
/// Writes through a temporary file and renames, so readers never see a partial file.
void write_file_atomic(const std::string& path, std::string_view contents);

std::vector<std::string> split(std::string_view text, char sep);
std::string trim(std::string_view text);

}  // namespace rebar
