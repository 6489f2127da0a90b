#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "levyheat/geometry.hpp"
#include "levyheat/levy.hpp"

// Experiment configuration (a single JSON document) and its validation.

namespace levyheat::cli {

struct TGrid {
  double start = 1e-1;
  double stop = 1e-6;
  int points = 11;
  std::string spacing = "geometric";

  std::vector<double> values() const;
};

struct McConfig {
  std::uint64_t samples = 100000;
  std::uint64_t seed = 12345;
};

struct ExperimentConfig {
  std::string model_json;  // raw records kept verbatim for round-tripping
  std::string shape_json;
  TGrid t_grid;
  std::vector<std::string> methods{"quadrature"};
  McConfig mc;
  std::vector<std::string> checks;
  std::map<std::string, double> tolerances;
  std::string output_prefix = "levyheat_run";
  double union_min_gap = 1e-9;
};

// Throws std::invalid_argument with a field-level diagnostic on bad input.
ExperimentConfig parse_config(const std::string& json_text);
std::string serialize_config(const ExperimentConfig& cfg);

levy::LevyModel build_model(const std::string& model_json);
geometry::Shape build_shape(const std::string& shape_json, double min_gap = 1e-9);

// Default pass tolerances per check, overridable from the config.
double check_tolerance(const ExperimentConfig& cfg, const std::string& check);

// Empty when compatible; otherwise a diagnostic explaining the mismatch.
std::string check_incompatibility(const std::string& check,
                                  const levy::LevyModel& model);
std::string method_incompatibility(const std::string& method,
                                   const levy::LevyModel& model,
                                   const geometry::Shape& shape);

}  // namespace levyheat::cli
