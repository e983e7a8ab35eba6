#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rareis/engine.hpp"

namespace rareis::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

/// Everything a command line or config file can set.
struct CliConfig {
  std::vector<Method> methods;
  std::optional<Family> family;
  std::map<std::string, double> params;
  std::optional<unsigned> n;
  std::optional<double> gamma;
  std::uint64_t samples = 100000;
  double epsilon = 0.05;
  std::uint64_t seed = 0;
  std::optional<std::string> sweep_variable;
  std::optional<std::vector<double>> sweep_values;
  std::uint64_t grid = 8192;

  bool operator==(const CliConfig&) const = default;
};

nlohmann::json config_to_json(const CliConfig& config);
/// Overlays the keys present in j onto config. Throws ValidationError.
void apply_config_json(const nlohmann::json& j, CliConfig& config);

/// Parses "2,4,8", "2:12" and "0.6:1.4:0.2" style lists.
std::vector<double> parse_values(const std::string& text);

inline const char* const kCsvHeader =
    "method,family,n,gamma,samples,seed,estimate,scv,ci95_half_width,wall_seconds,wnrv,biased,"
    "bias_bound,adjusted_wnrv";

/// Runs one command line (without the program name). Results go to out,
/// diagnostics to err. Returns the process exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rareis::cli
