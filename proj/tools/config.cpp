#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

extern char** environ;

namespace lookback::tools {

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("config: " + msg);
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

void check_key(const std::string& key, const std::string& where) {
  const auto dot = key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == key.size())
    fail(where + ": key '" + key + "' is not of the form section.key");
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = path + ":" + std::to_string(lineno);
    if (eq == std::string::npos) fail(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    check_key(key, where);
    if (value.empty()) fail(where + ": empty value for '" + key + "'");
    cfg.kv_[key] = value;
  }
  return cfg;
}

void Config::apply_env(const char* prefix) {
  const std::string pre(prefix);
  for (char** e = environ; *e; ++e) {
    const std::string entry(*e);
    if (entry.compare(0, pre.size(), pre) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string name = entry.substr(pre.size(), eq - pre.size());
    const std::string value = entry.substr(eq + 1);
    const auto sep = name.find("__");
    if (sep == std::string::npos || sep == 0 || sep + 2 >= name.size())
      continue;
    const std::string key =
        lower(name.substr(0, sep)) + "." + lower(name.substr(sep + 2));
    kv_[key] = value;
  }
}

void Config::set(const std::string& key, const std::string& value) {
  check_key(key, "set");
  kv_[key] = value;
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string Config::get_string(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) fail("missing key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Config::parse_double(const std::string& key) const {
  const std::string v = get_string(key);
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE)
    fail("key '" + key + "': '" + v + "' is not a number");
  return x;
}

double Config::get_double(const std::string& key) const {
  return parse_double(key);
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? parse_double(key) : fallback;
}

double Config::get_auto_double(const std::string& key) const {
  if (!has(key)) return std::numeric_limits<double>::quiet_NaN();
  if (lower(get_string(key)) == "auto")
    return std::numeric_limits<double>::quiet_NaN();
  return parse_double(key);
}

long long Config::get_int(const std::string& key) const {
  const std::string v = get_string(key);
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE)
    fail("key '" + key + "': '" + v + "' is not an integer");
  return x;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key,
                              std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  errno = 0;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE)
    fail("key '" + key + "': '" + v + "' is not an unsigned integer");
  return x;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = lower(get_string(key));
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  fail("key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  std::string v = get_string(key);
  std::replace(v.begin(), v.end(), ',', ' ');
  std::istringstream in(v);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0' || errno == ERANGE)
      fail("key '" + key + "': '" + tok + "' is not a number");
    out.push_back(x);
  }
  if (out.empty()) fail("key '" + key + "': empty list");
  return out;
}

}  // namespace lookback::tools
