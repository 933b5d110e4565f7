#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vnc/threshold.hpp"

#include <cmath>
#include <map>
#include <random>

using namespace vnc;

namespace {

const ThresholdCurve& cached_curve(const LayoutSpec& l)
{
    static std::map<std::tuple<int, double, double>, ThresholdCurve> cache;
    const auto key = std::tuple{static_cast<int>(l.kind), l.t1, l.t2};
    auto it = cache.find(key);
    if (it == cache.end()) {
        it = cache.emplace(key, threshold_curve(l, ASweep{}, DetectorModel::ideal(l.modes()))).first;
    }
    return it->second;
}

std::vector<LayoutSpec> sample_layouts()
{
    return {make_unbalanced_bs(0.5), make_unbalanced_bs(0.8), make_mach_zehnder(0.5, 0.7),
            make_hom_extended(0.4, 0.6), make_two_copy_variant(0.7, 0.7)};
}

} // namespace

TEST_CASE("sweep values are negative, log spaced and ordered")
{
    const auto a = ASweep{}.values();
    REQUIRE(a.size() == 200);
    CHECK(a.front() == doctest::Approx(-1e-2));
    CHECK(a.back() == doctest::Approx(-1e6));
    for (std::size_t k = 1; k < a.size(); ++k) {
        CHECK(a[k] < a[k - 1]);
        CHECK(a[k] / a[k - 1] == doctest::Approx(a[1] / a[0]));
    }
}

TEST_CASE("the maximizer beats random classical inputs")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lm(std::log(1e-4), std::log(8.0));
    for (const LayoutSpec& l : sample_layouts()) {
        const DetectorModel det = DetectorModel::ideal(l.modes());
        const WitnessMaximizer solver(l, det);
        const ClassicalClickEvaluator eval(l, det);
        for (double a : {-0.1, -3.0, -100.0, -1e4}) {
            const WitnessMax best = solver.maximize(a);
            CHECK(best.w_max == doctest::Approx(best.stats.p_success + a * best.stats.p_error));
            for (int k = 0; k < 300; ++k) {
                std::vector<double> m(l.input_ports.size());
                for (double& x : m) {
                    x = std::exp(lm(rng));
                }
                const ClickStats s = eval.randomized(m);
                CHECK(s.p_success + a * s.p_error <= best.w_max + 1e-12);
            }
        }
    }
}

TEST_CASE("threshold curves are monotone and concave")
{
    for (const LayoutSpec& l : sample_layouts()) {
        const ThresholdCurve& c = cached_curve(l);
        CHECK(c.points.size() >= 50);
        for (const auto& p : c.saturated) {
            CHECK(p.a > -1.0); // only the brightest optima run into the cap
        }
        CHECK(is_monotone(c.points));
        CHECK(is_concave(c.points));
        CHECK(c.lines.size() == 200);
    }
}

TEST_CASE("balanced splitter recovers the antibunching threshold")
{
    const ThresholdCurve& c = cached_curve(make_unbalanced_bs(0.5));
    const PowerLawFit fit = power_law_fit(c, 1e-8, 1e-4);
    CHECK(fit.exponent == doctest::Approx(0.5).epsilon(0.01));
    CHECK(fit.prefactor == doctest::Approx(1.0).epsilon(0.01));
    for (const auto& p : c.points) {
        if (p.p_error < 1e-4) {
            CHECK(p.p_success / std::sqrt(p.p_error) == doctest::Approx(1.0).epsilon(0.01));
        }
    }
}

TEST_CASE("envelope filter drops dents and keeps the hull")
{
    std::vector<CurvePoint> pts;
    for (double pe : {1e-6, 1e-4, 1e-2}) {
        pts.push_back(CurvePoint{-1.0, 0.0, pe, std::sqrt(pe), {}, false});
    }
    pts.push_back(CurvePoint{-1.0, 0.0, 1e-3, 1e-3, {}, false}); // far below the hull
    const auto removed = enforce_envelope(pts);
    CHECK(removed.size() == 1);
    CHECK(pts.size() == 3);
    CHECK(is_monotone(pts));
    CHECK(is_concave(pts));
}

TEST_CASE("power-law fit of exact data")
{
    std::vector<double> pe;
    std::vector<double> ps;
    for (int k = 0; k < 20; ++k) {
        pe.push_back(std::pow(10.0, -8.0 + 0.2 * k));
        ps.push_back(3.0 * std::pow(pe.back(), 2.0 / 3.0));
    }
    const PowerLawFit fit = power_law_fit(pe, ps, 1e-9, 1e-3);
    CHECK(fit.exponent == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(fit.prefactor == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(fit.residual < 1e-12);
    CHECK_THROWS(power_law_fit(pe, ps, 1e-3, 1e-2));
}

TEST_CASE("refined bound never exceeds the swept bound")
{
    const ThresholdCurve& c = cached_curve(make_two_copy_variant(0.7, 0.7));
    for (const auto& p : c.points) {
        const double swept = c.witness_bound(p.p_error);
        const double refined = c.refined_bound(p.p_error);
        CHECK(refined <= swept + 1e-15);
        CHECK(refined >= p.p_success - 1e-12);
    }
}

TEST_CASE("random classical inputs are never certified")
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> lm(std::log(1e-3), std::log(6.0));
    for (const LayoutSpec& l : sample_layouts()) {
        const ThresholdCurve& c = cached_curve(l);
        const ClassicalClickEvaluator eval(l, DetectorModel::ideal(l.modes()));
        for (int k = 0; k < 40; ++k) {
            std::vector<double> m(l.input_ports.size());
            for (double& x : m) {
                x = std::exp(lm(rng));
            }
            CHECK_FALSE(is_nonclassical(eval.randomized(m), c).nonclassical);
            if (m.size() == 2) {
                CHECK_FALSE(is_nonclassical(eval.distinguishable(m), c).nonclassical);
            }
        }
    }
}

TEST_CASE("noiseless single photons are always certified")
{
    for (const LayoutSpec& l : sample_layouts()) {
        const ThresholdCurve& c = cached_curve(l);
        for (double eta : {1e-3, 0.1, 0.9}) {
            SourceParams p;
            p.eta = eta;
            CHECK(is_nonclassical(source_click_stats(p, l, DetectorModel::ideal(l.modes())), c).nonclassical);
        }
    }
}

TEST_CASE("the unbalanced splitter certifies weak noisy sources")
{
    for (double t : {0.3, 0.5, 0.8}) {
        const LayoutSpec l = make_unbalanced_bs(t);
        const ThresholdCurve& c = cached_curve(l);
        for (double eta : {1e-4, 1e-3, 1e-2}) {
            for (double nbar : {1e-4, 1e-3, 1e-2}) {
                SourceParams p;
                p.eta = eta;
                p.nbar = nbar;
                CHECK(is_nonclassical(source_click_stats(p, l, DetectorModel::ideal(2)), c).nonclassical);
            }
        }
    }
}

TEST_CASE("factorized two-copy layout accepts a bright one-sided point")
{
    for (double t1 : {0.0, 1.0}) {
        const ThresholdCurve& c = cached_curve(make_hom_extended(t1, 0.5));
        CHECK_FALSE(is_nonclassical(ClickStats{0.99, 0.0, Provenance::Ingested}, c).nonclassical);
    }
}

TEST_CASE("weak-light prediction helpers")
{
    CHECK(mz_linear_ratio(0.5, 0.6, false) == doctest::Approx(50.0));
    CHECK(mz_linear_ratio(0.5, 0.6, true) == doctest::Approx(200.0));
    CHECK(mz_prefactor(0.5, 0.6) == doctest::Approx(10.0));
    CHECK(two_copy_tolerant_ratio(0.99) == doctest::Approx(0.1));
    CHECK_THROWS(mz_linear_ratio(0.5, 0.5, false));
}

TEST_CASE("critical noise ratio of the Mach-Zehnder")
{
    const LayoutSpec l = make_mach_zehnder(0.5, 0.6);
    SourceParams p;
    p.eta = 1e-3;
    const CriticalRatio r = critical_noise_ratio(l, p, DetectorModel::ideal(2), cached_curve(l));
    CHECK(r.ratio == doctest::Approx(50.0).epsilon(0.15));
    CHECK(r.eta / r.nbar == doctest::Approx(r.ratio));

    p.nbar = r.nbar;
    const CriticalRatio e = critical_eta(l, p, DetectorModel::ideal(2), cached_curve(l));
    CHECK(e.eta == doctest::Approx(1e-3).epsilon(1e-6));
}

TEST_CASE("critical ratio against a power law")
{
    const LayoutSpec l = make_mach_zehnder(0.5, 0.6);
    SourceParams p;
    p.eta = 1e-4;
    const ThresholdFn sqrt_law = [](double pe) { return mz_prefactor(0.5, 0.6) * std::sqrt(pe); };
    const CriticalRatio r = critical_noise_ratio(l, p, DetectorModel::ideal(2), sqrt_law);
    CHECK(r.ratio == doctest::Approx(50.0).epsilon(0.05));
}

TEST_CASE("no verdict change raises")
{
    const LayoutSpec l = make_unbalanced_bs(0.5);
    SourceParams p;
    p.eta = 0.1;
    const ThresholdFn never = [](double) { return 0.0; };
    const ThresholdFn always = [](double) { return 1.0; };
    CHECK_THROWS_AS(critical_noise_ratio(l, p, DetectorModel::ideal(2), never), NoFlipError);
    CHECK_THROWS_AS(critical_noise_ratio(l, p, DetectorModel::ideal(2), always), NoFlipError);
    p.nbar = 1e-3;
    CHECK_THROWS_AS(critical_eta(l, p, DetectorModel::ideal(2), never), NoFlipError);
}

TEST_CASE("weak coherent light below the curve support stays classical")
{
    const LayoutSpec l = make_unbalanced_bs(0.35);
    const ThresholdCurve& c = cached_curve(l);
    const ClassicalClickEvaluator eval(l, DetectorModel::ideal(2));
    for (double m : {1e-4, 3e-4, 7e-4}) {
        const ClickStats s = eval.randomized(std::vector<double>{m});
        REQUIRE(s.p_error < c.points.front().p_error);
        const Verdict v = is_nonclassical(s, c);
        CHECK(v.low_confidence);
        CHECK_FALSE(v.nonclassical);
    }
}
