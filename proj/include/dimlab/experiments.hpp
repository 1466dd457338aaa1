#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dimlab/results.hpp"

namespace dimlab {

struct ScaleRange {
  int lo = 0;
  int hi = 0;
};

/// Parses "lo..hi" (or a single integer) into a non-empty range.
ScaleRange parse_range(const std::string& text);

struct ExperimentConfig {
  std::string command;
  std::string space = "cantor";
  std::string variant = "full-fit";
  std::optional<ScaleRange> n;
  std::optional<int> n_max;
  int d = 0;
  std::optional<double> u;
  std::string sweep = "all";
  std::optional<std::size_t> trials;
  std::uint64_t seed = 1;
  std::string check = "profile";
  std::string drift = "both";
  std::string adversary = "both";
  int depth = 3;
  double t = 0.5;
  double s = 0.6;
  std::string out;
  std::string plot;

  /// Throws InvalidArgument with a precise message on a bad combination.
  void validate() const;
};

/// Applies one key=value setting (keys match the long flag names without dashes).
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Reads "key = value" lines; blank lines and lines starting with '#' are skipped.
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Validates and dispatches to the owning module.
ResultTable run(const ExperimentConfig& config);

ResultTable run_estimate(const ExperimentConfig& config);
ResultTable run_cantor(const ExperimentConfig& config);
ResultTable run_prevalence(const ExperimentConfig& config);
ResultTable run_statement31(const ExperimentConfig& config);
ResultTable run_energy(const ExperimentConfig& config);
ResultTable run_lemma52(const ExperimentConfig& config);
ResultTable run_report(const ExperimentConfig& config);

/// Reference dimension of a named base space (interval, cantor, harmonic).
double reference_dimension(const std::string& space);

/// One acceptance criterion with its tolerances fixed in the implementation.
struct CriterionOutcome {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0;
  ResultTable table;
};

inline constexpr int kCriterionCount = 10;
inline constexpr std::uint64_t kCriterionSeed = 20240611;

CriterionOutcome run_criterion(int id, std::uint64_t seed = kCriterionSeed);

/// Product-invariant scale windows for a base space and cube dimension.
ScaleRange product_window(const std::string& space, int d);

}  // namespace dimlab
