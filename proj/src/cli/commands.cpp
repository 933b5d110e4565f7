#include "cli/commands.hpp"

#include "cli/figures.hpp"
#include "vnc/source_model.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>

namespace vnc::cli {

namespace {

using nlohmann::json;

std::string verdict_word(bool nonclassical)
{
    return nonclassical ? "nonclassical" : "classical";
}

std::vector<double> log_grid(double lo, double hi, int points)
{
    if (!(lo > 0.0) || !(hi >= lo) || points < 1) {
        throw UsageError("log grid needs 0 < min <= max and at least one point");
    }
    std::vector<double> v(points);
    for (int k = 0; k < points; ++k) {
        v[k] = points == 1 ? lo : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / (points - 1));
    }
    v.back() = hi;
    return v;
}

std::string require_out(const RunConfig& cfg)
{
    if (cfg.out.empty()) {
        throw UsageError("missing required option --out");
    }
    return cfg.out;
}

void write_sidecar(const std::string& path, const json& doc)
{
    write_text(path + ".json", doc.dump(2) + "\n");
}

ThresholdCurve obtain_curve(const RunConfig& cfg)
{
    if (cfg.has("curve")) {
        ThresholdCurve c = curve_from_table(read_csv(cfg.get("curve")));
        if (cfg.kind) {
            c.layout = cfg.layout();
        }
        return c;
    }
    return threshold_curve(cfg.layout(), cfg.sweep, cfg.detectors(), cfg.witness);
}

void check_cap(const RunConfig& cfg, const ThresholdCurve& curve)
{
    if (cfg.strict_cap && !curve.saturated.empty()) {
        throw NumericalError(std::to_string(curve.saturated.size()) + " optima sit on the magnitude cap " +
                             format_number(cfg.witness.magnitude_cap) + " (first at a = " +
                             format_number(curve.saturated.front().a) + ")");
    }
}

int cmd_threshold(const RunConfig& cfg, std::ostream& out)
{
    const std::string path = require_out(cfg);
    const LayoutSpec layout = cfg.layout();
    const ThresholdCurve curve = threshold_curve(layout, cfg.sweep, cfg.detectors(), cfg.witness);
    check_cap(cfg, curve);
    if (static_cast<int>(curve.points.size()) < kMinCurveRows) {
        throw NumericalError("only " + std::to_string(curve.points.size()) +
                             " interior boundary points; widen the a sweep or check the layout");
    }
    curve_table(curve).write(path);
    json doc;
    doc["command"] = "threshold";
    doc["config"] = config_echo(cfg);
    doc["diagnostics"] = curve_diagnostics(curve, cfg.witness);
    write_sidecar(path, doc);
    out << "wrote " << curve.points.size() << " boundary points to " << path << "\n";
    return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out)
{
    const std::string path = require_out(cfg);
    const LayoutSpec layout = cfg.layout();
    const DetectorModel det = cfg.detectors();
    const ThresholdCurve curve = obtain_curve(cfg);
    check_cap(cfg, curve);
    const std::string swept = cfg.get("sweep");
    if (swept != "nbar" && swept != "eta") {
        throw UsageError("sweep must be nbar or eta");
    }
    const auto values = log_grid(cfg.number("sweep-min"), cfg.number("sweep-max"),
                                 parse_count(cfg.get("sweep-points"), "sweep-points"));
    CsvTable t;
    t.header = {"eta", "nbar", "p_success", "p_error", "p_success_max", "margin", "verdict", "low_confidence"};
    int flips = 0;
    std::optional<bool> previous;
    for (double v : values) {
        SourceParams p = cfg.source;
        (swept == "nbar" ? p.nbar : p.eta) = v;
        if (swept == "eta" && v > 1.0) {
            throw UsageError("eta sweep must stay within [0, 1]");
        }
        const ClickStats s = source_click_stats(p, layout, det);
        const Verdict verdict = is_nonclassical(s, curve);
        if (previous && *previous != verdict.nonclassical) {
            ++flips;
        }
        previous = verdict.nonclassical;
        t.add_row({format_number(p.eta), format_number(p.nbar), format_number(s.p_success), format_number(s.p_error),
                   format_number(verdict.p_success_max), format_number(verdict.margin),
                   verdict_word(verdict.nonclassical), verdict.low_confidence ? "1" : "0"});
    }
    t.write(path);

    json doc;
    doc["command"] = "simulate";
    doc["config"] = config_echo(cfg);
    doc["verdict_flips"] = flips;
    try {
        const CriticalRatio r = swept == "nbar" ? critical_noise_ratio(layout, cfg.source, det, curve)
                                                : critical_eta(layout, cfg.source, det, curve);
        doc["critical"] = {{"ratio", r.ratio}, {"eta", r.eta}, {"nbar", r.nbar}, {"low_confidence", r.low_confidence}};
    } catch (const NoFlipError& e) {
        doc["critical"] = nullptr;
        doc["critical_note"] = e.what();
    } catch (const std::domain_error& e) {
        doc["critical"] = nullptr;
        doc["critical_note"] = e.what();
    }
    doc["diagnostics"] = curve_diagnostics(curve, cfg.witness);
    write_sidecar(path, doc);
    out << "wrote " << values.size() << " rows to " << path << " (" << flips << " verdict flips)\n";
    return kExitOk;
}

int cmd_fit(const RunConfig& cfg, std::ostream& out)
{
    if (!cfg.has("curve")) {
        throw UsageError("fit needs a curve file");
    }
    const ThresholdCurve curve = curve_from_table(read_csv(cfg.get("curve")));
    const double lo = cfg.number("fit-min");
    const double hi = cfg.number("fit-max");
    if (!(lo > 0.0) || !(hi > lo)) {
        throw UsageError("need 0 < fit-min < fit-max");
    }
    PowerLawFit fit;
    try {
        fit = power_law_fit(curve, lo, hi);
    } catch (const std::runtime_error& e) {
        throw NumericalError(e.what());
    }
    CsvTable t;
    t.header = {"exponent", "prefactor", "residual", "points", "pe_min", "pe_max"};
    t.add_row({format_number(fit.exponent), format_number(fit.prefactor), format_number(fit.residual),
               std::to_string(fit.points), format_number(fit.pe_min), format_number(fit.pe_max)});
    if (!cfg.out.empty()) {
        t.write(cfg.out);
    }
    out << t.str();
    const double limit = cfg.number("max-residual");
    if (fit.residual > limit) {
        throw NumericalError("fit residual " + format_number(fit.residual) + " exceeds " + format_number(limit));
    }
    return kExitOk;
}

int cmd_classify(const RunConfig& cfg, std::ostream& out)
{
    std::vector<double> ps;
    std::vector<double> pe;
    if (cfg.has("stats")) {
        const CsvTable in = read_csv(cfg.get("stats"));
        ps = in.numbers("p_success");
        pe = in.numbers("p_error");
    } else if (cfg.has("p-success") && cfg.has("p-error")) {
        ps = {cfg.number("p-success")};
        pe = {cfg.number("p-error")};
    } else {
        throw UsageError("classify needs --p-success and --p-error, or --stats");
    }
    if (!cfg.has("curve") && !cfg.kind) {
        throw UsageError("missing required option --layout (or --curve)");
    }
    const ThresholdCurve curve = obtain_curve(cfg);
    const bool hbt = cfg.kind && *cfg.kind == LayoutKind::UnbalancedBS && cfg.t1 == 0.5;
    CsvTable t;
    t.header = {"p_success", "p_error", "p_success_max", "margin", "verdict", "low_confidence"};
    if (hbt) {
        t.header.push_back("hbt_ratio");
    }
    for (std::size_t k = 0; k < ps.size(); ++k) {
        if (!(ps[k] >= 0.0 && ps[k] <= 1.0 && pe[k] >= 0.0 && pe[k] <= 1.0)) {
            throw UsageError("click probabilities must lie in [0, 1]");
        }
        const ClickStats s{ps[k], pe[k], Provenance::Ingested};
        const Verdict v = is_nonclassical(s, curve);
        std::vector<std::string> row{format_number(ps[k]),          format_number(pe[k]),
                                     format_number(v.p_success_max), format_number(v.margin),
                                     verdict_word(v.nonclassical),   v.low_confidence ? "1" : "0"};
        if (hbt) {
            try {
                row.push_back(format_number(hbt_ratio_estimate(s).ratio));
            } catch (const std::domain_error&) {
                row.push_back("nan");
            }
        }
        t.add_row(std::move(row));
    }
    if (!cfg.out.empty()) {
        t.write(cfg.out);
    }
    out << t.str();
    return kExitOk;
}

int cmd_reproduce(const RunConfig& cfg, const std::string& figure, const std::set<std::string>& given,
                  std::ostream& out)
{
    const std::string dir = require_out(cfg);
    std::filesystem::create_directories(dir);
    const FigureData data = reproduce_figure(figure, cfg, given);
    for (const auto& [name, table] : data.tables) {
        table.write((std::filesystem::path(dir) / name).string());
        out << "wrote " << (std::filesystem::path(dir) / name).string() << "\n";
    }
    json doc = data.meta;
    doc["command"] = "reproduce";
    doc["figure"] = figure;
    doc["config"] = config_echo(cfg);
    write_text((std::filesystem::path(dir) / (figure + ".json")).string(), doc.dump(2) + "\n");
    return kExitOk;
}

} // namespace

CsvTable curve_table(const ThresholdCurve& curve)
{
    CsvTable t;
    t.header = {"a", "p_error", "p_success_max"};
    const std::size_t ports = curve.layout.input_ports.size();
    for (std::size_t k = 0; k < ports; ++k) {
        t.header.push_back(ports == 1 ? "alpha" : (k == 0 ? "alpha" : "beta"));
    }
    for (const auto& p : curve.points) {
        std::vector<std::string> row{format_number(p.a), format_number(p.p_error), format_number(p.p_success)};
        for (double m : p.magnitudes) {
            row.push_back(format_number(m));
        }
        t.add_row(std::move(row));
    }
    return t;
}

ThresholdCurve curve_from_table(const CsvTable& table)
{
    const auto a = table.numbers("a");
    const auto pe = table.numbers("p_error");
    const auto ps = table.numbers("p_success_max");
    std::vector<std::vector<double>> mags(a.size());
    for (const char* name : {"alpha", "beta"}) {
        if (table.column(name) >= 0) {
            const auto m = table.numbers(name);
            for (std::size_t k = 0; k < m.size(); ++k) {
                mags[k].push_back(m[k]);
            }
        }
    }
    ThresholdCurve c;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (!(ps[k] >= 0.0 && ps[k] <= 1.0 && pe[k] >= 0.0 && pe[k] <= 1.0) || !(a[k] < 0.0)) {
            throw NumericalError("curve row " + std::to_string(k + 1) + " is out of range");
        }
        c.points.push_back(CurvePoint{a[k], ps[k] + a[k] * pe[k], pe[k], ps[k], mags[k], false});
        c.lines.push_back(SupportLine{a[k], ps[k] + a[k] * pe[k]});
        c.a_values.push_back(a[k]);
    }
    if (!is_monotone(c.points) || !is_concave(c.points)) {
        throw NumericalError("curve file is not monotone and concave");
    }
    return c;
}

json curve_diagnostics(const ThresholdCurve& curve, const WitnessOptions& opts)
{
    json d;
    d["requested_points"] = curve.a_values.size();
    d["interior_points"] = curve.points.size();
    d["saturated_points"] = curve.saturated.size();
    d["discarded_points"] = curve.discarded.size();
    d["merged_points"] = curve.lines.size() - curve.points.size() - curve.saturated.size() - curve.discarded.size();
    json sat = json::array();
    for (const auto& p : curve.saturated) {
        sat.push_back(p.a);
    }
    d["saturated_a"] = sat;
    d["monotone"] = is_monotone(curve.points);
    d["concave"] = is_concave(curve.points);
    if (!curve.points.empty()) {
        d["p_error_support"] = {curve.points.front().p_error, curve.points.back().p_error};
    }
    d["solver"] = {{"grid_points", opts.grid_points},   {"magnitude_cap", opts.magnitude_cap},
                   {"magnitude_floor", opts.magnitude_floor}, {"param_tol", opts.param_tol},
                   {"cap_tol", opts.cap_tol},           {"quad_nodes", opts.quad_nodes}};
    return d;
}

json config_echo(const RunConfig& cfg)
{
    json c = json::object();
    for (const auto& [k, v] : cfg.effective) {
        c[k] = v;
    }
    return c;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Variable nonclassicality thresholds for click detectors"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    struct Sub {
        CLI::App* app = nullptr;
        std::map<std::string, std::string> values;
        std::map<std::string, CLI::Option*> options;
        std::string config;
        std::string positional;
    };
    std::map<std::string, Sub> subs;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"threshold", "trace the classical threshold curve of a layout"},
        {"simulate", "sweep a source parameter and classify its click statistics"},
        {"fit", "fit the weak-light power law of a curve file"},
        {"classify", "classify measured click probabilities"},
        {"reproduce", "write figure data sets (fig3a fig3b fig3c fig4a fig4b fig4c)"},
    };
    for (const auto& [name, help] : commands) {
        Sub& s = subs[name];
        s.app = app.add_subcommand(name, help);
        for (const auto& key : known_keys()) {
            s.options[key.name] = s.app->add_option("--" + key.name, s.values[key.name], key.help);
        }
        s.app->add_option("--config", s.config, "key = value file");
        if (name == "fit") {
            s.app->add_option("curve_file", s.positional, "curve CSV");
        }
        if (name == "reproduce") {
            s.app->add_option("figure", s.positional, "figure id")->required();
        }
    }

    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    for (auto& [name, s] : subs) {
        if (!s.app->parsed()) {
            continue;
        }
        try {
            KeyValues flags;
            for (const auto& [key, opt] : s.options) {
                if (opt->count() > 0) {
                    flags[key] = s.values[key];
                }
            }
            if (name == "fit" && !s.positional.empty()) {
                flags["curve"] = s.positional;
            }
            const KeyValues file = s.config.empty() ? KeyValues{} : read_config_file(s.config);
            std::set<std::string> given;
            for (const KeyValues* layer : std::initializer_list<const KeyValues*>{&file, &flags}) {
                for (const auto& kv : *layer) {
                    given.insert(kv.first);
                }
            }
            const RunConfig cfg = resolve_config(merge_config(file, flags));
            if (name == "threshold") {
                return cmd_threshold(cfg, out);
            }
            if (name == "simulate") {
                return cmd_simulate(cfg, out);
            }
            if (name == "fit") {
                return cmd_fit(cfg, out);
            }
            if (name == "classify") {
                return cmd_classify(cfg, out);
            }
            return cmd_reproduce(cfg, s.positional, given, out);
        } catch (const UsageError& e) {
            err << "error: " << e.what() << "\n";
            return kExitUsage;
        } catch (const NumericalError& e) {
            err << "numerical failure: " << e.what() << "\n";
            return kExitNumerical;
        } catch (const std::invalid_argument& e) {
            err << "error: " << e.what() << "\n";
            return kExitUsage;
        } catch (const std::exception& e) {
            err << "numerical failure: " << e.what() << "\n";
            return kExitNumerical;
        }
    }
    return kExitUsage;
}

} // namespace vnc::cli
