#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "expander/params.hpp"
#include "expander/solver.hpp"

namespace expander::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kProfileSchema = "expander-profile/1";
inline constexpr std::string_view kSweepSchema = "expander-sweep/1";
inline constexpr std::string_view kManifestSchema = "expander-manifest/1";

/// Shortest round-trip decimal form, independent of the global locale.
std::string format_number(double value);

/// Parses a comma separated list of numbers ("0.01,0.02"); throws
/// std::invalid_argument on malformed entries.
std::vector<double> parse_number_list(std::string_view text);

std::string profile_csv(const ExpanderProfile& profile);
nlohmann::ordered_json profile_json(const ExpanderProfile& profile);

/// Empty when `doc` follows the profile schema, otherwise the first problem.
std::optional<std::string> validate_profile_json(const nlohmann::json& doc);

struct SweepRow {
  double eps;
  double R;
  bool ok;
  double phi_inf;
  double k_hat;
  double residual;
  std::string error;
};

std::string sweep_csv(const std::vector<SweepRow>& rows);
nlohmann::ordered_json sweep_json(const LomseSpec& spec,
                                  const std::vector<SweepRow>& rows);

/// Everything needed to regenerate an output file. The timestamp is the
/// only field that is not an input.
struct RunManifest {
  std::string command;
  int n = 0;
  int p = 0;
  int k = 0;
  std::vector<double> eps;
  std::vector<double> radius;
  std::string format = "csv";
  std::string output;
  SolverOptions solver;
  std::uint64_t seed_first = 1;
  std::uint64_t seed_second = 2;
  std::string tool_version{kToolVersion};
  std::string timestamp;
};

nlohmann::ordered_json manifest_json(const RunManifest& manifest);
/// Throws std::invalid_argument on a malformed manifest.
RunManifest manifest_from_json(const nlohmann::json& doc);
std::string manifest_path_for(const std::string& output);

}  // namespace expander::cli
