#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lookback::tools {

// flat "section.key = value" configuration with '#' comments. Later sources
// override earlier ones: file, then environment, then explicit set() calls.
class Config {
 public:
  static Config from_file(const std::string& path);

  // environment entries like LOOKBACK_ENGINE__N=400 map to engine.n
  void apply_env(const char* prefix = "LOOKBACK_");

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  // "auto" (or absence) maps to NaN
  double get_auto_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  double parse_double(const std::string& key) const;
  std::map<std::string, std::string> kv_;
};

}  // namespace lookback::tools
