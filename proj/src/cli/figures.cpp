#include "cli/figures.hpp"

#include "vnc/source_model.hpp"

#include <cmath>
#include <future>
#include <limits>

namespace vnc::cli {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// boundary tables scan nbar over this log grid
constexpr double kBoundaryNbarMin = 1e-6;
constexpr double kBoundaryNbarMax = 1e-3;
constexpr int kBoundaryNbarPoints = 7;

// fixed-exponent two-copy fit, deep in the weak-light regime
constexpr double kFitMin = 1e-16;
constexpr double kFitMax = 1e-12;

std::vector<double> boundary_nbar()
{
    std::vector<double> v(kBoundaryNbarPoints);
    const double l0 = std::log(kBoundaryNbarMin);
    const double l1 = std::log(kBoundaryNbarMax);
    for (int k = 0; k < kBoundaryNbarPoints; ++k) {
        v[k] = std::exp(l0 + (l1 - l0) * k / (kBoundaryNbarPoints - 1));
    }
    v.front() = kBoundaryNbarMin;
    v.back() = kBoundaryNbarMax;
    return v;
}

// runs f(0..n-1) concurrently, results in index order
template <class F>
auto parallel_map(std::size_t n, F f) -> std::vector<decltype(f(std::size_t{}))>
{
    std::vector<std::future<decltype(f(std::size_t{}))>> jobs;
    for (std::size_t k = 0; k < n; ++k) {
        jobs.push_back(std::async(std::launch::async, f, k));
    }
    std::vector<decltype(f(std::size_t{}))> out;
    for (auto& j : jobs) {
        out.push_back(j.get());
    }
    return out;
}

DetectorModel figure_detectors(const RunConfig& cfg, const LayoutSpec& layout)
{
    DetectorModel det;
    if (cfg.efficiencies.size() == 1) {
        det.efficiencies.assign(layout.modes(), cfg.efficiencies[0]);
    } else if (static_cast<int>(cfg.efficiencies.size()) == layout.modes()) {
        det.efficiencies = cfg.efficiencies;
    } else {
        throw UsageError("efficiency needs one value or one per detector");
    }
    return det;
}

double value_or(const RunConfig& cfg, const std::set<std::string>& given, const std::string& key, double fallback)
{
    return given.count(key) ? cfg.number(key) : fallback;
}

template <class F>
double nan_on_no_flip(F f)
{
    try {
        return f();
    } catch (const NoFlipError&) {
        return kNaN;
    }
}

json curve_summary(const ThresholdCurve& c)
{
    return {{"interior_points", c.points.size()},
            {"saturated_points", c.saturated.size()},
            {"discarded_points", c.discarded.size()}};
}

// fig3a / fig3b: thresholds and eta boundaries against the weak-light lines
FigureData mach_zehnder_panels(const std::string& id, const RunConfig& cfg, const std::set<std::string>& given)
{
    const double t1 = value_or(cfg, given, "t1", 0.5);
    const double coherence = value_or(cfg, given, "coherence", id == "fig3a" ? 1.0 : 0.0);
    const double noise_coherence = value_or(cfg, given, "noise-coherence", 0.0);
    const auto t2s = fig3_t2_values(id);

    const auto curves = parallel_map(t2s.size(), [&](std::size_t k) {
        const LayoutSpec layout = make_mach_zehnder(t1, t2s[k]);
        return threshold_curve(layout, cfg.sweep, figure_detectors(cfg, layout), cfg.witness);
    });

    CsvTable th;
    th.header = {"t2", "delta", "p_error", "p_success_numeric", "p_success_linear"};
    for (std::size_t k = 0; k < t2s.size(); ++k) {
        const double f = mz_prefactor(t1, t2s[k]);
        for (const auto& p : curves[k].points) {
            th.add_row({format_number(t2s[k]), format_number(t1 + t2s[k] - 1.0), format_number(p.p_error),
                        format_number(p.p_success), format_number(f * std::sqrt(p.p_error))});
        }
    }

    const auto nbars = boundary_nbar();
    const auto rows = parallel_map(t2s.size(), [&](std::size_t k) {
        std::vector<std::vector<std::string>> out;
        const LayoutSpec& layout = curves[k].layout;
        const DetectorModel det = figure_detectors(cfg, layout);
        const double linear = mz_linear_ratio(t1, t2s[k], coherence < 1.0);
        for (double nbar : nbars) {
            SourceParams p;
            p.nbar = nbar;
            p.signal_coherence = coherence;
            p.noise_coherence = noise_coherence;
            const double eta = nan_on_no_flip([&] { return critical_eta(layout, p, det, curves[k]).eta; });
            out.push_back({format_number(t2s[k]), format_number(t1 + t2s[k] - 1.0), format_number(nbar),
                           format_number(eta), format_number(linear * nbar)});
        }
        return out;
    });
    CsvTable bd;
    bd.header = {"t2", "delta", "nbar", "eta_numeric", "eta_linear"};
    for (const auto& block : rows) {
        for (const auto& r : block) {
            bd.add_row(r);
        }
    }

    FigureData d;
    d.tables = {{id + "_threshold.csv", th}, {id + "_boundary.csv", bd}};
    d.meta["t1"] = t1;
    d.meta["coherence"] = coherence;
    d.meta["noise_coherence"] = noise_coherence;
    d.meta["curves"] = json::array();
    for (const auto& c : curves) {
        d.meta["curves"].push_back(curve_summary(c));
    }
    return d;
}

// fig3c: critical ratios, coherent vs polychromatic
FigureData mach_zehnder_ratios(const RunConfig& cfg, const std::set<std::string>& given)
{
    const double t1 = value_or(cfg, given, "t1", 0.5);
    const double eta = value_or(cfg, given, "eta", kFigureEta);
    const double noise_coherence = value_or(cfg, given, "noise-coherence", 0.0);
    const std::string mode = cfg.get("difference");
    const auto t2s = fig3_t2_values("fig3c");

    const auto ratios = parallel_map(t2s.size(), [&](std::size_t k) {
        const LayoutSpec layout = make_mach_zehnder(t1, t2s[k]);
        const DetectorModel det = figure_detectors(cfg, layout);
        const ThresholdCurve curve = threshold_curve(layout, cfg.sweep, det, cfg.witness);
        std::pair<double, double> r;
        for (int poly = 0; poly < 2; ++poly) {
            SourceParams p;
            p.eta = eta;
            p.signal_coherence = poly ? 0.0 : 1.0;
            p.noise_coherence = noise_coherence;
            const double v = nan_on_no_flip([&] { return critical_noise_ratio(layout, p, det, curve).ratio; });
            (poly ? r.second : r.first) = v;
        }
        return r;
    });

    CsvTable t;
    t.header = {"t2",         "delta",  "ratio_coherent", "ratio_polychromatic", "linear_coherent",
                "linear_polychromatic", "difference_numeric", "difference_linear"};
    for (std::size_t k = 0; k < t2s.size(); ++k) {
        const double lc = mz_linear_ratio(t1, t2s[k], false);
        const double lp = mz_linear_ratio(t1, t2s[k], true);
        t.add_row({format_number(t2s[k]), format_number(t1 + t2s[k] - 1.0), format_number(ratios[k].first),
                   format_number(ratios[k].second), format_number(lc), format_number(lp),
                   format_number(ratio_difference(ratios[k].first, ratios[k].second, mode)),
                   format_number(ratio_difference(lc, lp, mode))});
    }
    FigureData d;
    d.tables = {{"fig3c_ratios.csv", t}};
    d.meta["t1"] = t1;
    d.meta["eta"] = eta;
    d.meta["difference"] = mode;
    return d;
}

struct TwoCopyCurve {
    ThresholdCurve curve;
    double prefactor = 0.0;
};

TwoCopyCurve two_copy_curve(double t, const RunConfig& cfg)
{
    const LayoutSpec layout = make_two_copy_variant(t, t);
    TwoCopyCurve c{threshold_curve(layout, cfg.sweep, figure_detectors(cfg, layout), cfg.witness), 0.0};
    c.prefactor = fixed_exponent_prefactor(c.curve, kTwoCopyExponent, kFitMin, kFitMax);
    return c;
}

ThresholdFn power_law(double prefactor)
{
    return [prefactor](double pe) { return std::min(1.0, prefactor * std::pow(pe, kTwoCopyExponent)); };
}

// fig4a / fig4b: two-copy thresholds and eta boundaries
FigureData two_copy_panels(const std::string& id, const RunConfig& cfg, const std::set<std::string>& given)
{
    const double indist = value_or(cfg, given, "indist", id == "fig4a" ? 1.0 : 0.0);
    const auto ts = fig4_t_values(id);
    const auto curves = parallel_map(ts.size(), [&](std::size_t k) { return two_copy_curve(ts[k], cfg); });

    CsvTable th;
    th.header = {"t", "p_error", "p_success_numeric", "p_success_linear"};
    for (std::size_t k = 0; k < ts.size(); ++k) {
        for (const auto& p : curves[k].curve.points) {
            th.add_row({format_number(ts[k]), format_number(p.p_error), format_number(p.p_success),
                        format_number(curves[k].prefactor * std::pow(p.p_error, kTwoCopyExponent))});
        }
    }

    const auto nbars = boundary_nbar();
    std::vector<std::pair<std::size_t, std::size_t>> jobs;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        for (std::size_t j = 0; j < nbars.size(); ++j) {
            jobs.emplace_back(k, j);
        }
    }
    const auto etas = parallel_map(jobs.size(), [&](std::size_t n) {
        const auto [k, j] = jobs[n];
        const ThresholdCurve& curve = curves[k].curve;
        const DetectorModel det = figure_detectors(cfg, curve.layout);
        SourceParams p;
        p.nbar = nbars[j];
        p.indistinguishability = indist;
        const double numeric = nan_on_no_flip([&] { return critical_eta(curve.layout, p, det, curve).eta; });
        const double linear =
            nan_on_no_flip([&] { return critical_eta(curve.layout, p, det, power_law(curves[k].prefactor)).eta; });
        return std::pair{numeric, linear};
    });
    CsvTable bd;
    bd.header = {"t", "nbar", "eta_numeric", "eta_linear", "eta_tolerant"};
    for (std::size_t n = 0; n < jobs.size(); ++n) {
        const auto [k, j] = jobs[n];
        bd.add_row({format_number(ts[k]), format_number(nbars[j]), format_number(etas[n].first),
                    format_number(etas[n].second), format_number(two_copy_tolerant_ratio(ts[k]) * nbars[j])});
    }

    FigureData d;
    d.tables = {{id + "_threshold.csv", th}, {id + "_boundary.csv", bd}};
    d.meta["indist"] = indist;
    d.meta["exponent"] = kTwoCopyExponent;
    d.meta["fit_window"] = {kFitMin, kFitMax};
    d.meta["prefactors"] = json::array();
    for (const auto& c : curves) {
        d.meta["prefactors"].push_back(c.prefactor);
    }
    return d;
}

// fig4c: critical ratios for indistinguishable and distinguishable photons
FigureData two_copy_ratios(const RunConfig& cfg, const std::set<std::string>& given)
{
    const double eta = value_or(cfg, given, "eta", kFigureEta);
    const std::string mode = cfg.get("difference");
    const auto ts = fig4_t_values("fig4c");
    const auto curves = parallel_map(ts.size(), [&](std::size_t k) { return two_copy_curve(ts[k], cfg); });

    // per T: numeric I=1, numeric I=0, linear I=1, linear I=0
    const auto ratios = parallel_map(ts.size() * 4, [&](std::size_t n) {
        const std::size_t k = n / 4;
        const bool distinguishable = n % 2 == 1;
        const bool linear = (n / 2) % 2 == 1;
        const ThresholdCurve& curve = curves[k].curve;
        const DetectorModel det = figure_detectors(cfg, curve.layout);
        SourceParams p;
        p.eta = eta;
        p.indistinguishability = distinguishable ? 0.0 : 1.0;
        return nan_on_no_flip([&] {
            return linear ? critical_noise_ratio(curve.layout, p, det, power_law(curves[k].prefactor)).ratio
                          : critical_noise_ratio(curve.layout, p, det, curve).ratio;
        });
    });

    CsvTable t;
    t.header = {"t",        "ratio_indist", "ratio_dist",         "linear_indist",
                "linear_dist", "tolerant",  "difference_numeric", "difference_linear"};
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const double* r = &ratios[4 * k];
        t.add_row({format_number(ts[k]), format_number(r[0]), format_number(r[1]), format_number(r[2]),
                   format_number(r[3]), format_number(two_copy_tolerant_ratio(ts[k])),
                   format_number(ratio_difference(r[0], r[1], mode)),
                   format_number(ratio_difference(r[2], r[3], mode))});
    }
    FigureData d;
    d.tables = {{"fig4c_ratios.csv", t}};
    d.meta["eta"] = eta;
    d.meta["difference"] = mode;
    d.meta["exponent"] = kTwoCopyExponent;
    d.meta["fit_window"] = {kFitMin, kFitMax};
    return d;
}

} // namespace

const std::vector<std::string>& figure_ids()
{
    static const std::vector<std::string> ids = {"fig3a", "fig3b", "fig3c", "fig4a", "fig4b", "fig4c"};
    return ids;
}

std::vector<double> fig3_t2_values(const std::string& id)
{
    if (id == "fig3c") {
        return {0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
    }
    return {0.55, 0.6, 0.7, 0.8, 0.9};
}

std::vector<double> fig4_t_values(const std::string& id)
{
    if (id == "fig4c") {
        return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
    }
    return {0.3, 0.5, 0.7, 0.9, 0.99};
}

double ratio_difference(double a, double b, const std::string& mode)
{
    if (mode == "absolute") {
        return b - a;
    }
    if (mode == "relative") {
        return (b - a) / a;
    }
    if (mode == "log") {
        return std::log(b / a);
    }
    throw UsageError("difference must be absolute, relative or log");
}

FigureData reproduce_figure(const std::string& id, const RunConfig& cfg, const std::set<std::string>& given)
{
    ratio_difference(1.0, 1.0, cfg.get("difference"));
    if (id == "fig3a" || id == "fig3b") {
        return mach_zehnder_panels(id, cfg, given);
    }
    if (id == "fig3c") {
        return mach_zehnder_ratios(cfg, given);
    }
    if (id == "fig4a" || id == "fig4b") {
        return two_copy_panels(id, cfg, given);
    }
    if (id == "fig4c") {
        return two_copy_ratios(cfg, given);
    }
    throw UsageError("unknown figure '" + id + "' (fig3a fig3b fig3c fig4a fig4b fig4c)");
}

} // namespace vnc::cli
