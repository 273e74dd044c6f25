/*
 * config.hpp
 *
 * Flat key = value run configuration. Keys mirror the model symbols
 * (gamma, xi, u_levels, eta_S, ...) so a parameter table maps one-to-one
 * onto a config file. Parsing, validation, canonical serialization and the
 * ICU-based derivation of the infection cap live here.
 */

#ifndef SIRSYNTH_CONFIG_HPP_
#define SIRSYNTH_CONFIG_HPP_

#include <cstdint>
#include <string>

#include "sirsynth/abstraction.hpp"
#include "sirsynth/runtime.hpp"

namespace sirsynth {

struct IcuInputs {
  double n_icu = 0.0;
  double n_total = 0.0;
  double severity_rate = 0.0;
  bool set = false;
};

struct RunConfig {
  ModelParams params;
  Grid grid;
  Thresholds thresholds;
  ProblemBounds bounds;
  IntegratorConfig integrator;
  SelectionConfig selection;
  AbstractionConfig abstraction() const {
    return {integrator, strict_direction_check, workers};
  }
  bool strict_direction_check = false;
  unsigned workers = 0;
  double t_end = 1000.0;
  std::uint64_t seed = 20240101;
  IcuInputs icu;

  void validate() const;
};

/* ICU-derived infection cap: the admissible severe fraction of the total
 * population. round_down truncates to 2 decimals. */
double derive_ibar_from_icu(double n_icu, double n_total, double severity_rate,
                            bool round_down = true);

/* Throws std::runtime_error with a line diagnostic on malformed input. If
 * IS_max is absent but the ICU inputs are present, the cap is derived. */
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/* Canonical serialization; parse(serialize(c)) == c. */
std::string serialize_config(const RunConfig& c);

}  // namespace sirsynth

#endif  // SIRSYNTH_CONFIG_HPP_
