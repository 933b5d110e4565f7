// The vnc command line: threshold, simulate, fit, classify, reproduce.
#ifndef VNC_CLI_COMMANDS_HPP
#define VNC_CLI_COMMANDS_HPP

#include "cli/config.hpp"
#include "cli/csv.hpp"
#include "vnc/threshold.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace vnc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kMinCurveRows = 50;

/// Parses argv and runs one subcommand; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Columns a, p_error, p_success_max, then one optimal magnitude per port.
CsvTable curve_table(const ThresholdCurve& curve);

/// Rebuilds points and witness lines from a curve CSV and checks
/// monotonicity and concavity.
ThresholdCurve curve_from_table(const CsvTable& table);

nlohmann::json curve_diagnostics(const ThresholdCurve& curve, const WitnessOptions& opts);
nlohmann::json config_echo(const RunConfig& cfg);

} // namespace vnc::cli

#endif // VNC_CLI_COMMANDS_HPP
