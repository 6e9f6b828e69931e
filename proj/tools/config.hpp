// config.hpp
//
// Flat "key = value" config files: one assignment per line, '#' starts a
// comment, values may be double-quoted. Lookups are typed with a caller
// fallback; parse problems name the file and line.

#ifndef ANE_TOOLS_CONFIG_HPP
#define ANE_TOOLS_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>

namespace anecli {

class Config {
 public:
  // Empty path gives an empty config (all lookups hit their fallback).
  static Config Load(const std::string& path) {
    Config cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const std::string trimmed = Trim(line);
      if (trimmed.empty() || trimmed[0] == '#') continue;
      const std::size_t eq = trimmed.find('=');
      if (eq == std::string::npos || eq == 0)
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": expected key = value");
      const std::string key = Trim(trimmed.substr(0, eq));
      std::string value = Trim(trimmed.substr(eq + 1));
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
        value = value.substr(1, value.size() - 2);
      } else {
        const std::size_t hash = value.find('#');
        if (hash != std::string::npos) value = Trim(value.substr(0, hash));
      }
      if (key.empty())
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": empty key");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  bool Has(const std::string& key) const { return values_.count(key) != 0; }

  std::string Str(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double Num(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::size_t used = 0;
    double parsed = 0.0;
    try {
      parsed = std::stod(it->second, &used);
    } catch (const std::exception&) {
      throw std::runtime_error("config key '" + key + "': bad number '" +
                               it->second + "'");
    }
    if (used != it->second.size())
      throw std::runtime_error("config key '" + key + "': bad number '" +
                               it->second + "'");
    return parsed;
  }

  std::size_t Count(const std::string& key, std::size_t fallback) const {
    const double parsed = Num(key, static_cast<double>(fallback));
    if (parsed < 0 || parsed != static_cast<double>(
                                    static_cast<std::uint64_t>(parsed)))
      throw std::runtime_error("config key '" + key +
                               "': expected a non-negative integer");
    return static_cast<std::size_t>(parsed);
  }

 private:
  static std::string Trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
    return s.substr(b, e - b);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace anecli

#endif  // ANE_TOOLS_CONFIG_HPP
