// Run configuration: known keys, key = value files, precedence and typed
// resolution.
#ifndef VNC_CLI_CONFIG_HPP
#define VNC_CLI_CONFIG_HPP

#include "vnc/detectors.hpp"
#include "vnc/layout.hpp"
#include "vnc/source_model.hpp"
#include "vnc/threshold.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vnc::cli {

/// Bad flags, keys or values; exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Solver or data failure; exit code 1.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using KeyValues = std::map<std::string, std::string>;

struct KeySpec {
    std::string name;
    std::string help;
    std::string fallback; // built-in default, empty when none
};

const std::vector<KeySpec>& known_keys();
bool is_known_key(const std::string& key);

/// Reads `key = value` lines; '#' starts a comment. Unknown keys and
/// malformed lines raise UsageError.
KeyValues parse_config_text(const std::string& text, const std::string& origin = "config");
KeyValues read_config_file(const std::string& path);

/// Built-in defaults, overridden by the file, overridden by flags.
KeyValues merge_config(const KeyValues& file, const KeyValues& flags);

double parse_number(const std::string& text, const std::string& key);
int parse_count(const std::string& text, const std::string& key);
bool parse_flag(const std::string& text, const std::string& key);

struct RunConfig {
    KeyValues effective;
    std::optional<LayoutKind> kind;
    double t1 = 0.5;
    double t2 = 0.5;
    double phase = 0.0;
    SourceParams source;
    std::vector<double> efficiencies;
    ASweep sweep;
    WitnessOptions witness;
    bool strict_cap = false;
    std::string out;

    bool has(const std::string& key) const { return effective.count(key) != 0; }
    const std::string& get(const std::string& key) const;
    double number(const std::string& key) const;

    LayoutSpec layout() const;     // UsageError when no layout was given
    DetectorModel detectors() const;
};

RunConfig resolve_config(const KeyValues& merged);

} // namespace vnc::cli

#endif // VNC_CLI_CONFIG_HPP
