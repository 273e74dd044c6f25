#include "sirsynth/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sirsynth {

void RunConfig::validate() const {
  params.validate();
  grid.validate();
  thresholds.validate(grid);
  bounds.validate();
  integrator.validate();
  selection.validate();
  if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be > 0");
  // thresholds were snapped onto the grid at parse time; nothing more here
}

double derive_ibar_from_icu(double n_icu, double n_total, double severity_rate,
                            bool round_down) {
  if (!(n_icu > 0.0 && n_total > 0.0 && severity_rate > 0.0))
    throw std::invalid_argument("ICU inputs must be positive");
  const double cap = n_icu / (n_total * severity_rate);
  return round_down ? std::floor(cap * 100.0) / 100.0 : cap;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<double> parse_list(const std::string& v, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw std::runtime_error("config: bad number '" + item + "' in " + key);
    }
  }
  if (out.empty()) throw std::runtime_error("config: empty list for " + key);
  return out;
}

class KeyMap {
 public:
  explicit KeyMap(const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("config: line " + std::to_string(lineno) + " is not key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      if (key.empty() || val.empty())
        throw std::runtime_error("config: line " + std::to_string(lineno) + " is not key = value");
      if (!map_.emplace(key, val).second)
        throw std::runtime_error("config: duplicate key " + key);
    }
  }

  bool has(const std::string& k) const { return map_.count(k) != 0; }
  std::string raw(const std::string& k) const {
    const auto it = map_.find(k);
    if (it == map_.end()) throw std::runtime_error("config: missing key " + k);
    used_.insert(k);
    return it->second;
  }
  double number(const std::string& k) const {
    const std::string v = raw(k);
    if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw std::runtime_error("config: bad number '" + v + "' for " + k);
    }
  }
  double number_or(const std::string& k, double dflt) const { return has(k) ? number(k) : dflt; }
  bool flag_or(const std::string& k, bool dflt) const {
    if (!has(k)) return dflt;
    const std::string v = raw(k);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::runtime_error("config: bad boolean '" + v + "' for " + k);
  }
  void check_all_used() const {
    for (const auto& [k, v] : map_)
      if (!used_.count(k)) throw std::runtime_error("config: unknown key " + k);
  }

 private:
  std::map<std::string, std::string> map_;
  mutable std::set<std::string> used_;
};

std::string fmt(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  const KeyMap kv(text);
  RunConfig c;
  c.params.gamma = kv.number("gamma");
  c.params.xi = kv.number("xi");
  c.params.u_levels = parse_list(kv.raw("u_levels"), "u_levels");
  c.grid.eta_S = kv.number("eta_S");
  c.grid.eta_I = kv.number("eta_I");
  c.grid.validate();

  // thresholds must be integer multiples of eta_I
  for (double eps : parse_list(kv.raw("thresholds"), "thresholds")) {
    const double q = eps / c.grid.eta_I;
    const auto k = static_cast<std::int32_t>(std::llround(q));
    if (k < 1 || std::abs(q - static_cast<double>(k)) > 1e-6)
      throw std::runtime_error("config: threshold " + fmt(eps) +
                               " is not a positive integer multiple of eta_I");
    c.thresholds.multiples.push_back(k);
  }

  c.bounds.S0_min = kv.number("S0_min");
  c.bounds.S0_max = kv.number("S0_max");
  c.bounds.I0_min = kv.number("I0_min");
  c.bounds.I0_max = kv.number("I0_max");
  c.bounds.SS_min = kv.number("SS_min");
  c.bounds.SF_min = kv.number("SF_min");
  c.bounds.IF_max = kv.number("IF_max");
  if (kv.has("N_icu") || kv.has("N_total") || kv.has("severity_rate")) {
    c.icu.n_icu = kv.number("N_icu");
    c.icu.n_total = kv.number("N_total");
    c.icu.severity_rate = kv.number("severity_rate");
    c.icu.set = true;
  }
  if (kv.has("IS_max"))
    c.bounds.IS_max = kv.number("IS_max");
  else if (c.icu.set)
    c.bounds.IS_max = derive_ibar_from_icu(c.icu.n_icu, c.icu.n_total, c.icu.severity_rate);
  else
    throw std::runtime_error("config: IS_max missing and no ICU inputs to derive it");

  c.integrator.step = kv.number_or("step", 0.01);
  c.integrator.horizon = kv.number_or("horizon", 1000.0);
  c.integrator.crossing_tol = kv.number_or("crossing_tol", 1e-9);
  c.selection.lambda = kv.number_or("lambda", 0.99);
  c.selection.horizon_T = kv.number_or("horizon_T", std::numeric_limits<double>::infinity());
  c.selection.max_depth = static_cast<int>(kv.number_or("max_depth", 8));
  c.selection.tail_tol = kv.number_or("tail_tol", 1e-3);
  c.strict_direction_check = kv.flag_or("strict_direction_check", false);
  c.workers = static_cast<unsigned>(kv.number_or("workers", 0));
  c.t_end = kv.number_or("t_end", 1000.0);
  c.seed = static_cast<std::uint64_t>(kv.number_or("seed", 20240101));
  kv.check_all_used();
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "# model\n";
  out << "gamma = " << fmt(c.params.gamma) << "\n";
  out << "xi = " << fmt(c.params.xi) << "\n";
  out << "u_levels = ";
  for (std::size_t i = 0; i < c.params.u_levels.size(); ++i)
    out << (i ? ", " : "") << fmt(c.params.u_levels[i]);
  out << "\n\n# grid\n";
  out << "eta_S = " << fmt(c.grid.eta_S) << "\n";
  out << "eta_I = " << fmt(c.grid.eta_I) << "\n";
  out << "thresholds = ";
  for (std::size_t i = 0; i < c.thresholds.multiples.size(); ++i)
    out << (i ? ", " : "") << fmt(static_cast<double>(c.thresholds.multiples[i]) * c.grid.eta_I);
  out << "\n\n# bounds\n";
  out << "S0_min = " << fmt(c.bounds.S0_min) << "\n";
  out << "S0_max = " << fmt(c.bounds.S0_max) << "\n";
  out << "I0_min = " << fmt(c.bounds.I0_min) << "\n";
  out << "I0_max = " << fmt(c.bounds.I0_max) << "\n";
  out << "SS_min = " << fmt(c.bounds.SS_min) << "\n";
  out << "IS_max = " << fmt(c.bounds.IS_max) << "\n";
  out << "SF_min = " << fmt(c.bounds.SF_min) << "\n";
  out << "IF_max = " << fmt(c.bounds.IF_max) << "\n";
  if (c.icu.set) {
    out << "N_icu = " << fmt(c.icu.n_icu) << "\n";
    out << "N_total = " << fmt(c.icu.n_total) << "\n";
    out << "severity_rate = " << fmt(c.icu.severity_rate) << "\n";
  }
  out << "\n# integrator\n";
  out << "step = " << fmt(c.integrator.step) << "\n";
  out << "horizon = " << fmt(c.integrator.horizon) << "\n";
  out << "crossing_tol = " << fmt(c.integrator.crossing_tol) << "\n";
  out << "\n# selection\n";
  out << "lambda = " << fmt(c.selection.lambda) << "\n";
  out << "horizon_T = " << fmt(c.selection.horizon_T) << "\n";
  out << "max_depth = " << c.selection.max_depth << "\n";
  out << "tail_tol = " << fmt(c.selection.tail_tol) << "\n";
  out << "\n# run\n";
  out << "strict_direction_check = " << (c.strict_direction_check ? "true" : "false") << "\n";
  out << "workers = " << c.workers << "\n";
  out << "t_end = " << fmt(c.t_end) << "\n";
  out << "seed = " << c.seed << "\n";
  return out.str();
}

}  // namespace sirsynth
