#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace grass {

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Strict number parsing; throws Error{InvalidArgument} naming `what`.
double parse_double(std::string_view s, const std::string& what);
long long parse_int(std::string_view s, const std::string& what);

/// Shortest round-trip decimal representation of `v`.
std::string format_double(double v);

/// Flat `key = value` file with `#` comments and no nesting.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, const std::string& origin = "<string>");
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get(const std::string& key) const;  // throws InvalidArgument if absent
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  long long get_int_or(const std::string& key, long long fallback) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string to_string() const;

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace grass
