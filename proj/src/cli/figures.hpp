// Data sets behind the published figures: Mach-Zehnder thresholds and
// boundaries (fig3a-c) and the two-copy variant (fig4a-c), each with its
// weak-light approximation alongside.
#ifndef VNC_CLI_FIGURES_HPP
#define VNC_CLI_FIGURES_HPP

#include "cli/config.hpp"
#include "cli/csv.hpp"
#include "vnc/threshold.hpp"

#include <json.hpp>

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace vnc::cli {

struct FigureData {
    std::vector<std::pair<std::string, CsvTable>> tables; // file name, table
    nlohmann::json meta;
};

inline constexpr double kFigureEta = 1e-3;
inline constexpr double kTwoCopyExponent = 2.0 / 3.0;

const std::vector<std::string>& figure_ids();

std::vector<double> fig3_t2_values(const std::string& id); // fig3a/b, or fig3c
std::vector<double> fig4_t_values(const std::string& id);  // fig4a/b, or fig4c

/// Difference of two critical ratios: absolute b - a, relative (b - a) / a, or log ln(b / a).
double ratio_difference(double a, double b, const std::string& mode);

/// Throws UsageError for an unknown id. `given` lists keys set explicitly
/// by flag or config file; the rest fall back to the figure's own settings.
FigureData reproduce_figure(const std::string& id, const RunConfig& cfg, const std::set<std::string>& given);

} // namespace vnc::cli

#endif // VNC_CLI_FIGURES_HPP
