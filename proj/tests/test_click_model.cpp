#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vnc/click_model.hpp"
#include "vnc/fock_oracle.hpp"

#include <cmath>
#include <random>

using namespace vnc;

namespace {

ClassicalInput randomized(std::vector<double> m)
{
    return ClassicalInput{std::move(m), true, {}};
}

} // namespace

TEST_CASE("balanced splitter with one coherent input")
{
    const LayoutSpec l = make_unbalanced_bs(0.5);
    const ClickStats s = classical_click_stats(l, randomized({1.0}), DetectorModel::ideal(2));
    CHECK(s.p_success == doctest::Approx(-std::expm1(-0.5)).epsilon(1e-14));
    CHECK(s.p_error == doctest::Approx(std::pow(std::expm1(-0.5), 2)).epsilon(1e-14));
}

TEST_CASE("weak light keeps relative precision")
{
    const LayoutSpec l = make_unbalanced_bs(0.5);
    const ClickStats s = classical_click_stats(l, randomized({1e-4}), DetectorModel::ideal(2));
    const double single = -std::expm1(-0.5e-8);
    CHECK(s.p_error == doctest::Approx(single * single).epsilon(1e-12));
    CHECK(s.p_error > 0.0);
}

TEST_CASE("detector efficiency rescales intensity")
{
    const LayoutSpec l = make_unbalanced_bs(0.3);
    const ClickStats lossy = classical_click_stats(l, randomized({2.0}), DetectorModel{{0.5, 0.5}});
    const ClickStats weaker = classical_click_stats(l, randomized({std::sqrt(2.0)}), DetectorModel::ideal(2));
    CHECK(lossy.p_success == doctest::Approx(weaker.p_success).epsilon(1e-13));
    CHECK(lossy.p_error == doctest::Approx(weaker.p_error).epsilon(1e-13));
}

TEST_CASE("phase quadrature converges to the Bessel closed form")
{
    const DetectorModel det = DetectorModel::ideal(3);
    for (const LayoutSpec& l : {make_hom_extended(0.4, 0.7), make_two_copy_variant(0.8, 0.6)}) {
        const ClassicalInput in = randomized({1.3, 0.9});
        for (DetectorSet k : {DetectorSet{0}, DetectorSet{0, 1}, DetectorSet{0, 1, 2}}) {
            const double exact = phase_averaged_no_click_bessel(l, in, k, det);
            const double coarse = phase_averaged_no_click(l, in, k, det, 16);
            const double fine = phase_averaged_no_click(l, in, k, det, 256);
            CHECK(fine == doctest::Approx(exact).epsilon(1e-13));
            CHECK(std::abs(fine - exact) <= std::abs(coarse - exact) + 1e-15);
        }
    }
}

TEST_CASE("inclusion-exclusion agrees with the stable form at moderate intensity")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> t(0.05, 0.95);
    std::uniform_real_distribution<double> m(0.1, 3.0);
    for (int k = 0; k < 50; ++k) {
        for (auto kind : {LayoutKind::UnbalancedBS, LayoutKind::MachZehnder, LayoutKind::HomExtended,
                          LayoutKind::TwoCopyVariant}) {
            const LayoutSpec l = make_layout(kind, t(rng), t(rng), 0.0);
            const ClassicalInput in =
                randomized(l.input_ports.size() == 1 ? std::vector<double>{m(rng)} : std::vector{m(rng), m(rng)});
            const DetectorModel det = DetectorModel::ideal(l.modes());
            const ClickStats a = classical_click_stats(l, in, det);
            const ClickStats b = classical_click_stats_inclusion_exclusion(l, in, det);
            CHECK(a.p_success == doctest::Approx(b.p_success).epsilon(1e-10));
            CHECK(a.p_error == doctest::Approx(b.p_error).epsilon(1e-10));
        }
    }
}

TEST_CASE("evaluator matches the direct computation")
{
    const LayoutSpec l = make_hom_extended(0.35, 0.55);
    const DetectorModel det{{0.9, 0.8, 0.7}};
    const ClassicalClickEvaluator eval(l, det);
    const std::vector<double> mags{0.7, 1.9};
    const ClickStats direct = classical_click_stats(l, randomized(mags), det);
    const ClickStats fast = eval.randomized(mags);
    CHECK(fast.p_success == doctest::Approx(direct.p_success).epsilon(1e-13));
    CHECK(fast.p_error == doctest::Approx(direct.p_error).epsilon(1e-13));

    const std::vector<double> phases{0.0, 1.1};
    const ClickStats fixed_direct = classical_click_stats(l, ClassicalInput{mags, false, phases}, det);
    const ClickStats fixed_fast = eval.fixed(mags, phases);
    CHECK(fixed_fast.p_success == doctest::Approx(fixed_direct.p_success).epsilon(1e-13));
    CHECK(fixed_fast.p_error == doctest::Approx(fixed_direct.p_error).epsilon(1e-13));
}

TEST_CASE("randomized statistics are the average of fixed-phase statistics")
{
    const LayoutSpec l = make_two_copy_variant(0.6, 0.45);
    const ClassicalClickEvaluator eval(l, DetectorModel::ideal(3));
    const std::vector<double> mags{1.2, 0.8};
    double ps = 0.0;
    double pe = 0.0;
    const int n = 512;
    for (int k = 0; k < n; ++k) {
        const std::vector<double> phases{0.0, 2.0 * M_PI * k / n};
        const ClickStats s = eval.fixed(mags, phases);
        ps += s.p_success / n;
        pe += s.p_error / n;
    }
    const ClickStats r = eval.randomized(mags);
    CHECK(r.p_success == doctest::Approx(ps).epsilon(1e-12));
    CHECK(r.p_error == doctest::Approx(pe).epsilon(1e-12));
}

TEST_CASE("distinguishable ports add intensities")
{
    const LayoutSpec l = make_two_copy_variant(0.6, 0.45);
    const ClassicalClickEvaluator eval(l, DetectorModel::ideal(3));
    const auto a = layout_transfer(l);
    const double m1 = 0.9;
    const double m2 = 1.4;
    double p0 = 1.0;
    double p01 = 1.0;
    double p012 = 1.0;
    for (int d = 0; d < 3; ++d) {
        const double intensity = std::norm(a(d, 1)) * m1 * m1 + std::norm(a(d, 2)) * m2 * m2;
        const double click = -std::expm1(-intensity);
        if (d < 2) {
            p01 *= click;
        }
        p012 *= click;
        if (d == 0) {
            p0 = click;
        }
    }
    const ClickStats s = eval.distinguishable(std::vector{m1, m2});
    CHECK(s.p_success == doctest::Approx(p01).epsilon(1e-13));
    CHECK(s.p_error == doctest::Approx(p012).epsilon(1e-13));
    CHECK(p0 >= p01);
}

TEST_CASE("invalid inputs")
{
    const LayoutSpec l = make_unbalanced_bs(0.5);
    CHECK_THROWS(classical_click_stats(l, randomized({-1.0}), DetectorModel::ideal(2)));
    CHECK_THROWS(classical_click_stats(l, randomized({1.0, 1.0}), DetectorModel::ideal(2)));
    CHECK_THROWS(classical_click_stats(l, randomized({1.0}), DetectorModel{{1.2, 1.0}}));
    CHECK_THROWS(classical_click_stats(l, randomized({1.0}), DetectorModel::ideal(2), 4));
}

TEST_CASE("coherent inputs agree with the photon-number oracle")
{
    const LayoutSpec l = make_hom_extended(0.3, 0.6);
    const DetectorModel det{{0.9, 1.0, 0.8}};
    for (bool random_phase : {true, false}) {
        const ClassicalInput in{{0.5, 0.3}, random_phase, random_phase ? std::vector<double>{} : std::vector{0.0, 0.8}};
        const ClickStats a = classical_click_stats(l, in, det);
        const ClickStats o = oracle_coherent_click_stats(l, in, det, 12);
        CHECK(std::abs(a.p_success - o.p_success) < 1e-12);
        CHECK(std::abs(a.p_error - o.p_error) < 1e-12);
    }
}
