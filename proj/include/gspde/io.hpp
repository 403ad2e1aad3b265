#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gspde {

/// One row of numbers rendered with 17 significant digits.
std::string format_value(double v);

/// CSV document: "# schema=1" first line, header, then rows. UTF-8, LF,
/// '.' decimal separator.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string to_string() const;
};

std::uint64_t fnv1a64(const std::string& bytes);

void write_file(const std::string& path, const std::string& contents);

/// Flat key = value configuration, one pair per line; '#' starts a comment.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Typed access with error messages naming the offending key.
struct ConfigError {
  std::string key;
  std::string message;
};

class Config {
 public:
  Config() = default;
  explicit Config(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  void set(const std::string& key, const std::string& value) {
    kv_[key] = value;
  }
  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  long get_long(const std::string& key) const;
  long get_long(const std::string& key, long fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::vector<int> get_int_list(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key,
                                const std::vector<int>& fallback) const;

  /// Throws ConfigError when a key outside the allowed set is present.
  void reject_unknown(const std::vector<std::string>& allowed) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace gspde
