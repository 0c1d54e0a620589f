#pragma once

#include <map>
#include <string>
#include <vector>

#include "cellpop/coefficients.hpp"
#include "cellpop/grid.hpp"

namespace cellpop {

// Flat INI-style configuration: [section] headers, key = value lines,
// '#' or ';' comments. Lookups throw config_error naming "section.key".
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse(const std::string& text);

  bool has(const std::string& sec, const std::string& key) const;
  std::string get_str(const std::string& sec, const std::string& key) const;
  std::string get_str(const std::string& sec, const std::string& key,
                      const std::string& fallback) const;
  double get_num(const std::string& sec, const std::string& key) const;
  double get_num(const std::string& sec, const std::string& key,
                 double fallback) const;
  std::size_t get_count(const std::string& sec, const std::string& key,
                        std::size_t fallback) const;
  bool get_bool(const std::string& sec, const std::string& key,
                bool fallback) const;
  std::vector<double> get_list(const std::string& sec, const std::string& key,
                               std::vector<double> fallback) const;
  void set(const std::string& sec, const std::string& key,
           const std::string& value);

 private:
  std::map<std::string, std::map<std::string, std::string>> kv_;
};

// Model assembly from the [model] (and optional [twophase]) sections.
ModelCoefficients build_model(const Config& cfg);

// Grid from [grid]; a_max = auto applies the tail rule: double A_max until the
// survival mass on [A_max, 2A_max] is below 1e-6 of the total (compact age
// support instead takes 6x the support end, covering the e^{-lambda a} tail).
Grid build_grid(const Config& cfg, const ModelCoefficients& model);

double auto_a_max(const ModelCoefficients& model);

}  // namespace cellpop
