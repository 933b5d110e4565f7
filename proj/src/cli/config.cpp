#include "cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vnc::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

void require_range(double v, double lo, double hi, const std::string& key)
{
    if (!(v >= lo && v <= hi)) {
        std::ostringstream msg;
        msg << key << " must lie in [" << lo << ", " << hi << "]";
        throw UsageError(msg.str());
    }
}

} // namespace

const std::vector<KeySpec>& known_keys()
{
    static const std::vector<KeySpec> keys = {
        {"layout", "detection layout: bs, mz, hom or twocopy", ""},
        {"t", "transmission; sets t1, and t2 too for two-copy layouts", ""},
        {"t1", "first beam splitter transmission", ""},
        {"t2", "second beam splitter transmission", ""},
        {"phase", "Mach-Zehnder phase of the source light (rad)", "0"},
        {"eta", "single-photon efficiency", "0.1"},
        {"nbar", "mean background photons per copy", "0.001"},
        {"coherence", "signal coherence in the Mach-Zehnder (1 monochromatic, 0 polychromatic)", "1"},
        {"noise-coherence", "background coherence in the Mach-Zehnder", "0"},
        {"indist", "two-copy indistinguishability", "1"},
        {"efficiency", "detector efficiency, one value or a comma list", "1"},
        {"a-min", "smallest |a| of the witness sweep", "0.01"},
        {"a-max", "largest |a| of the witness sweep", "1e6"},
        {"a-points", "number of swept a values", "200"},
        {"quad-nodes", "phase quadrature nodes", "256"},
        {"grid-points", "coarse optimizer grid per magnitude axis", "64"},
        {"cap", "coherent magnitude cap", "8"},
        {"strict-cap", "fail when an optimum sits on the magnitude cap", "false"},
        {"out", "output file (directory for reproduce)", ""},
        {"sweep", "simulate: swept parameter, nbar or eta", "nbar"},
        {"sweep-min", "simulate: smallest swept value", "1e-6"},
        {"sweep-max", "simulate: largest swept value", "1e-2"},
        {"sweep-points", "simulate: number of log-spaced values", "25"},
        {"fit-min", "fit window lower P_e", "1e-8"},
        {"fit-max", "fit window upper P_e", "1e-4"},
        {"max-residual", "fit: largest accepted relative residual", "0.05"},
        {"p-success", "classify: success probability", ""},
        {"p-error", "classify: error probability", ""},
        {"stats", "classify: CSV with p_success and p_error columns", ""},
        {"curve", "threshold curve CSV to use instead of computing one", ""},
        {"difference", "reproduce: ratio difference as absolute, relative or log", "absolute"},
    };
    return keys;
}

bool is_known_key(const std::string& key)
{
    const auto& keys = known_keys();
    return std::any_of(keys.begin(), keys.end(), [&](const KeySpec& k) { return k.name == key; });
}

KeyValues parse_config_text(const std::string& text, const std::string& origin)
{
    KeyValues out;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError(origin + ":" + std::to_string(number) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!is_known_key(key)) {
            throw UsageError(origin + ":" + std::to_string(number) + ": unknown key '" + key + "'");
        }
        if (value.empty()) {
            throw UsageError(origin + ":" + std::to_string(number) + ": empty value for '" + key + "'");
        }
        out[key] = value;
    }
    return out;
}

KeyValues read_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot read config file " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), path);
}

KeyValues merge_config(const KeyValues& file, const KeyValues& flags)
{
    KeyValues merged;
    for (const auto& k : known_keys()) {
        if (!k.fallback.empty()) {
            merged[k.name] = k.fallback;
        }
    }
    for (const auto* layer : {&file, &flags}) {
        for (const auto& [key, value] : *layer) {
            if (!is_known_key(key)) {
                throw UsageError("unknown key '" + key + "'");
            }
            merged[key] = value;
        }
    }
    return merged;
}

double parse_number(const std::string& text, const std::string& key)
{
    double v = 0.0;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw UsageError("invalid number '" + text + "' for " + key);
    }
    return v;
}

int parse_count(const std::string& text, const std::string& key)
{
    int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw UsageError("invalid integer '" + text + "' for " + key);
    }
    return v;
}

bool parse_flag(const std::string& text, const std::string& key)
{
    if (text == "true" || text == "1" || text == "yes" || text == "on") {
        return true;
    }
    if (text == "false" || text == "0" || text == "no" || text == "off") {
        return false;
    }
    throw UsageError("invalid boolean '" + text + "' for " + key);
}

const std::string& RunConfig::get(const std::string& key) const
{
    const auto it = effective.find(key);
    if (it == effective.end()) {
        throw UsageError("missing required option --" + key);
    }
    return it->second;
}

double RunConfig::number(const std::string& key) const
{
    return parse_number(get(key), key);
}

LayoutSpec RunConfig::layout() const
{
    if (!kind) {
        throw UsageError("missing required option --layout");
    }
    LayoutSpec l = make_layout(*kind, t1, t2, phase);
    return l;
}

DetectorModel RunConfig::detectors() const
{
    const int modes = layout().modes();
    DetectorModel det;
    if (efficiencies.size() == 1) {
        det.efficiencies.assign(modes, efficiencies[0]);
    } else if (static_cast<int>(efficiencies.size()) == modes) {
        det.efficiencies = efficiencies;
    } else {
        throw UsageError("efficiency needs one value or one per detector (" + std::to_string(modes) + ")");
    }
    return det;
}

RunConfig resolve_config(const KeyValues& merged)
{
    RunConfig c;
    c.effective = merged;
    if (c.has("layout")) {
        c.kind = parse_layout_kind(c.get("layout"));
        if (!c.kind) {
            throw UsageError("unknown layout '" + c.get("layout") + "' (bs, mz, hom, twocopy)");
        }
    }
    const bool two_copy = c.kind && (*c.kind == LayoutKind::HomExtended || *c.kind == LayoutKind::TwoCopyVariant);
    if (c.has("t")) {
        c.t1 = c.number("t");
        if (two_copy) {
            c.t2 = c.t1;
        }
    }
    if (c.has("t1")) {
        c.t1 = c.number("t1");
    }
    if (c.has("t2")) {
        c.t2 = c.number("t2");
    }
    require_range(c.t1, 0.0, 1.0, "t1");
    require_range(c.t2, 0.0, 1.0, "t2");
    c.phase = c.number("phase");

    c.source.eta = c.number("eta");
    c.source.nbar = c.number("nbar");
    c.source.signal_coherence = c.number("coherence");
    c.source.noise_coherence = c.number("noise-coherence");
    c.source.indistinguishability = c.number("indist");
    require_range(c.source.eta, 0.0, 1.0, "eta");
    require_range(c.source.nbar, 0.0, 1e3, "nbar");
    require_range(c.source.signal_coherence, 0.0, 1.0, "coherence");
    require_range(c.source.noise_coherence, 0.0, 1.0, "noise-coherence");
    require_range(c.source.indistinguishability, 0.0, 1.0, "indist");

    std::stringstream list(c.get("efficiency"));
    std::string item;
    while (std::getline(list, item, ',')) {
        const double nu = parse_number(trim(item), "efficiency");
        require_range(nu, 0.0, 1.0, "efficiency");
        c.efficiencies.push_back(nu);
    }

    c.sweep.abs_min = c.number("a-min");
    c.sweep.abs_max = c.number("a-max");
    c.sweep.points = parse_count(c.get("a-points"), "a-points");
    if (!(c.sweep.abs_min > 0.0) || !(c.sweep.abs_max > c.sweep.abs_min)) {
        throw UsageError("need 0 < a-min < a-max");
    }
    if (c.sweep.points < 50) {
        throw UsageError("a-points must be at least 50");
    }
    c.witness.quad_nodes = parse_count(c.get("quad-nodes"), "quad-nodes");
    if (c.witness.quad_nodes < kMinQuadratureNodes) {
        throw UsageError("quad-nodes must be at least " + std::to_string(kMinQuadratureNodes));
    }
    c.witness.grid_points = parse_count(c.get("grid-points"), "grid-points");
    if (c.witness.grid_points < 8) {
        throw UsageError("grid-points must be at least 8");
    }
    c.witness.magnitude_cap = c.number("cap");
    if (!(c.witness.magnitude_cap > c.witness.magnitude_floor)) {
        throw UsageError("cap must exceed the smallest grid magnitude");
    }
    c.strict_cap = parse_flag(c.get("strict-cap"), "strict-cap");
    if (c.has("out")) {
        c.out = c.get("out");
    }
    return c;
}

} // namespace vnc::cli
