#include "cellpop/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cellpop/characteristics.hpp"
#include "cellpop/errors.hpp"

namespace cellpop {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

double to_num(const std::string& sec, const std::string& key,
              const std::string& val) {
  try {
    std::size_t pos = 0;
    double v = std::stod(val, &pos);
    if (pos != val.size()) throw std::invalid_argument(val);
    return v;
  } catch (const std::exception&) {
    throw config_error("config " + sec + "." + key + ": not a number: '" +
                       val + "'");
  }
}

// Matrix CSV: first row "x0,x1,..." after a leading blank cell, then one row
// per age sample: "a,v0,v1,...".
Table2D read_table2d(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open table file '" + path + "'");
  Table2D t;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      cell = trim(cell);
      if (first && header) {
        first = false;
        continue;  // corner cell
      }
      first = false;
      row.push_back(to_num("table", path, cell));
    }
    if (header) {
      t.x = row;
      header = false;
    } else {
      if (row.size() != t.x.size() + 1)
        throw config_error("config: ragged row in table file '" + path + "'");
      t.a.push_back(row[0]);
      t.v.insert(t.v.end(), row.begin() + 1, row.end());
    }
  }
  if (t.a.size() < 2 || t.x.size() < 2)
    throw config_error("config: table file '" + path +
                       "' needs at least a 2x2 grid");
  return t;
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config c;
  std::stringstream in(text);
  std::string line, sec;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t cut = line.find_first_of("#;");
    if (cut != std::string::npos) line = line.substr(0, cut);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error("config line " + std::to_string(lineno) +
                           ": unterminated section header");
      sec = lower(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(lineno) +
                         ": expected key = value");
    std::string key = lower(trim(line.substr(0, eq)));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw config_error("config line " + std::to_string(lineno) +
                         ": empty key");
    c.kv_[sec][key] = val;
  }
  return c;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool Config::has(const std::string& sec, const std::string& key) const {
  auto s = kv_.find(sec);
  return s != kv_.end() && s->second.count(key) > 0;
}

std::string Config::get_str(const std::string& sec,
                            const std::string& key) const {
  auto s = kv_.find(sec);
  if (s != kv_.end()) {
    auto k = s->second.find(key);
    if (k != s->second.end()) return k->second;
  }
  throw config_error("config: missing required key " + sec + "." + key);
}

std::string Config::get_str(const std::string& sec, const std::string& key,
                            const std::string& fallback) const {
  return has(sec, key) ? get_str(sec, key) : fallback;
}

double Config::get_num(const std::string& sec, const std::string& key) const {
  return to_num(sec, key, get_str(sec, key));
}

double Config::get_num(const std::string& sec, const std::string& key,
                       double fallback) const {
  return has(sec, key) ? get_num(sec, key) : fallback;
}

std::size_t Config::get_count(const std::string& sec, const std::string& key,
                              std::size_t fallback) const {
  if (!has(sec, key)) return fallback;
  double v = get_num(sec, key);
  if (v < 0 || v != std::floor(v))
    throw config_error("config: " + sec + "." + key +
                       " must be a nonnegative integer");
  return std::size_t(v);
}

bool Config::get_bool(const std::string& sec, const std::string& key,
                      bool fallback) const {
  if (!has(sec, key)) return fallback;
  std::string v = lower(get_str(sec, key));
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw config_error("config: " + sec + "." + key + " must be a boolean");
}

std::vector<double> Config::get_list(const std::string& sec,
                                     const std::string& key,
                                     std::vector<double> fallback) const {
  if (!has(sec, key)) return fallback;
  std::vector<double> out;
  std::stringstream ss(get_str(sec, key));
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (!cell.empty()) out.push_back(to_num(sec, key, cell));
  }
  if (out.empty())
    throw config_error("config: " + sec + "." + key + " is an empty list");
  return out;
}

void Config::set(const std::string& sec, const std::string& key,
                 const std::string& value) {
  kv_[lower(sec)][lower(key)] = value;
}

ModelCoefficients build_model(const Config& cfg) {
  ModelCoefficients m;
  const std::string sec = "model";

  std::string growth = lower(cfg.get_str(sec, "growth"));
  if (growth == "case1") {
    m.growth = GrowthField::case1(cfg.get_num(sec, "c1"),
                                  cfg.get_num(sec, "x_max"));
  } else if (growth == "case2") {
    m.growth = GrowthField::case2(cfg.get_num(sec, "c1"),
                                  cfg.get_num(sec, "alpha"),
                                  cfg.get_num(sec, "beta"),
                                  cfg.get_num(sec, "x_max"));
  } else if (growth == "case3") {
    m.growth = GrowthField::case3(cfg.get_num(sec, "c1"),
                                  cfg.get_num(sec, "c2"),
                                  cfg.get_num(sec, "r1"),
                                  cfg.get_num(sec, "r2"),
                                  cfg.get_num(sec, "c4"));
  } else if (growth == "tabulated") {
    m.growth = GrowthField::tabulated(
        read_table2d(cfg.get_str(sec, "growth_table")),
        cfg.get_num(sec, "x_max"));
  } else {
    throw config_error("config: model.growth: unknown variant '" + growth +
                       "'");
  }

  std::string division = lower(cfg.get_str(sec, "division"));
  if (division == "power_window") {
    double a1 = cfg.get_num(sec, "a1", -1.0);
    m.division = DivisionRate::power_window(
        cfg.get_num(sec, "c2_rate"), cfg.get_num(sec, "gamma"),
        cfg.get_num(sec, "a_star"), a1 < 0 ? DivisionRate::unbounded : a1);
  } else if (division == "hill_age") {
    m.division = DivisionRate::hill_age(
        cfg.get_num(sec, "k1"), cfg.get_num(sec, "k2"),
        cfg.get_num(sec, "gamma1"), cfg.get_num(sec, "a_star"));
  } else if (division == "constant_window") {
    m.division = DivisionRate::constant_window(cfg.get_num(sec, "b_level"),
                                               cfg.get_num(sec, "a_end"));
  } else if (division == "tabulated") {
    m.division =
        DivisionRate::tabulated(read_table2d(cfg.get_str(sec, "division_table")));
  } else if (division == "zero") {
    m.division = DivisionRate::zero();
  } else {
    throw config_error("config: model.division: unknown variant '" + division +
                       "'");
  }

  std::string kernel = lower(cfg.get_str(sec, "kernel", "uniform"));
  if (kernel == "uniform") {
    m.kernel = RepartitionKernel::uniform();
  } else if (kernel == "truncated_uniform") {
    m.kernel = RepartitionKernel::truncated_uniform(cfg.get_num(sec, "eta"));
  } else if (kernel == "equal_mitosis") {
    m.kernel = RepartitionKernel::equal_mitosis();
  } else if (kernel == "tabulated_profile") {
    std::ifstream in(cfg.get_str(sec, "profile"));
    if (!in)
      throw config_error("config: cannot open model.profile file");
    std::vector<double> u, rho;
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line);
      if (line.empty() || line[0] == '#' || std::isalpha((unsigned char)line[0]))
        continue;
      std::stringstream ss(line);
      std::string a, b;
      if (!std::getline(ss, a, ',') || !std::getline(ss, b, ','))
        throw config_error("config: model.profile: expected u,rho rows");
      u.push_back(to_num(sec, "profile", trim(a)));
      rho.push_back(to_num(sec, "profile", trim(b)));
    }
    m.kernel = RepartitionKernel::tabulated_profile(std::move(u), std::move(rho));
  } else {
    throw config_error("config: model.kernel: unknown variant '" + kernel +
                       "'");
  }

  if (cfg.has("twophase", "d1")) {
    TwoPhaseParams tp;
    tp.d1 = cfg.get_num("twophase", "d1");
    tp.d2 = cfg.get_num("twophase", "d2", 0.0);
    std::string lkind = lower(cfg.get_str("twophase", "transition", "constant"));
    if (lkind == "constant") {
      tp.transition = TransitionRate::constant(cfg.get_num("twophase", "l", 0.0));
    } else if (lkind == "hill_in_x") {
      tp.transition = TransitionRate::hill_in_x(
          cfg.get_num("twophase", "a3"), cfg.get_num("twophase", "a2"),
          cfg.get_num("twophase", "gamma2"), cfg.get_num("twophase", "a_bar"));
    } else {
      throw config_error("config: twophase.transition: unknown variant '" +
                         lkind + "'");
    }
    tp.alpha1 = cfg.get_num("twophase", "alpha1");
    tp.alpha2 = cfg.get_num("twophase", "alpha2", 0.0);
    tp.theta = cfg.get_num("twophase", "theta", 1.0);
    if (cfg.has("twophase", "hill_k"))
      tp.hill_n = 1.0 / cfg.get_num("twophase", "hill_k");
    else
      tp.hill_n = cfg.get_num("twophase", "hill_n", 1.0);
    tp.validate();
    m.two_phase = tp;
  }
  return m;
}

double auto_a_max(const ModelCoefficients& model) {
  const DivisionRate& rate = model.division;
  if (rate.compact_age_support()) {
    double end = rate.age_support_end();
    // Births stop at the support end; 6x covers the e^{-lambda a} density tail.
    return end > 0.0 ? 6.0 * end : 8.0;
  }
  FlowSolver flow(model.growth, model.division);
  double xm = model.x_max();
  const int n_launch = 9, n_ages = 160;
  for (double a_max = 8.0; a_max <= 8.0 * 4096.0; a_max *= 2.0) {
    double total = 0.0, tail = 0.0;
    std::vector<double> ages(2 * n_ages + 1);
    for (std::size_t i = 0; i < ages.size(); ++i)
      ages[i] = 2.0 * a_max * double(i) / (ages.size() - 1);
    for (int j = 1; j <= n_launch; ++j) {
      double x0 = xm * double(j) / (n_launch + 1);
      Trace t = flow.trace(ages, x0);
      for (std::size_t i = 0; i + 1 < ages.size(); ++i) {
        double seg = 0.5 * (ages[i + 1] - ages[i]) *
                     (std::exp(-t.int_b[i]) + std::exp(-t.int_b[i + 1]));
        total += seg;
        if (ages[i] >= a_max) tail += seg;
      }
    }
    if (tail < 1e-6 * total) return a_max;
  }
  throw resolution_error(
      "a_max selection: survival mass does not become integrable; the model "
      "violates the integrability assumption");
}

Grid build_grid(const Config& cfg, const ModelCoefficients& model) {
  std::size_t nx = cfg.get_count("grid", "nx", 120);
  std::size_t na = cfg.get_count("grid", "na", 401);
  double a_max;
  std::string raw = lower(cfg.get_str("grid", "a_max", "auto"));
  a_max = (raw == "auto") ? auto_a_max(model) : cfg.get_num("grid", "a_max");

  // Nudge a_max upward so the outermost division-rate breakpoint sits on a
  // node; the quadrature convention needs aligned jumps for second order.
  auto breaks = model.division.age_breakpoints();
  double bp = 0.0;
  for (double b : breaks)
    if (b > bp && b < a_max) bp = b;
  if (bp > 0.0) {
    double k = std::floor(bp * double(na - 1) / a_max + 1e-9);
    if (k >= 1.0) a_max = bp * double(na - 1) / k;
  }
  return Grid::make(model.x_max(), nx, a_max, na);
}

}  // namespace cellpop
