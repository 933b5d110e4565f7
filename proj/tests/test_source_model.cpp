#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vnc/fock_oracle.hpp"
#include "vnc/source_model.hpp"

#include <cmath>
#include <random>

using namespace vnc;

TEST_CASE("noiseless single photon never gives a coincidence")
{
    SourceParams p;
    p.eta = 0.4;
    for (const LayoutSpec& l : {make_unbalanced_bs(0.3), make_mach_zehnder(0.5, 0.8)}) {
        const ClickStats s = source_click_stats(p, l, DetectorModel::ideal(2));
        CHECK(s.p_error == 0.0);
        CHECK(s.p_success == doctest::Approx(0.4 * photon_placement(p, l).probs(0)));
    }
}

TEST_CASE("background alone behaves like a phase-randomized coherent state")
{
    SourceParams p;
    p.nbar = 0.3;
    const LayoutSpec l = make_unbalanced_bs(0.25);
    const ClickStats s = source_click_stats(p, l, DetectorModel::ideal(2));
    const double c0 = -std::expm1(-0.3 * 0.25);
    const double c1 = -std::expm1(-0.3 * 0.75);
    CHECK(s.p_success == doctest::Approx(c0).epsilon(1e-14));
    CHECK(s.p_error == doctest::Approx(c0 * c1).epsilon(1e-14));
}

TEST_CASE("balanced splitter weak-light approximations")
{
    SourceParams p;
    p.eta = 0.1;
    p.nbar = 1e-3;
    const ClickStats s = source_click_stats(p, make_unbalanced_bs(0.5), DetectorModel::ideal(2));
    CHECK(s.p_success == doctest::Approx((p.eta + p.nbar) / 2).epsilon(0.01));
    CHECK(s.p_error == doctest::Approx(p.eta * p.nbar / 2).epsilon(0.02));
}

TEST_CASE("Mach-Zehnder photon placement")
{
    SourceParams p;
    const LayoutSpec l = make_mach_zehnder(0.5, 0.7);
    p.signal_coherence = 1.0;
    CHECK(mz_photon_placement(p, l).probs(0) == doctest::Approx(0.5 * 0.3 + 0.7 * 0.5 + 2 * std::sqrt(0.5 * 0.7 * 0.5 * 0.3)));
    p.signal_coherence = 0.0;
    CHECK(mz_photon_placement(p, l).probs(0) == doctest::Approx(0.5 * 0.3 + 0.7 * 0.5));
    for (double v : {0.0, 0.3, 1.0}) {
        p.signal_coherence = v;
        CHECK(mz_photon_placement(p, l).probs.sum() == doctest::Approx(1.0));
    }
}

TEST_CASE("two noiseless photons never fire three detectors")
{
    SourceParams p;
    p.eta = 0.3;
    for (const LayoutSpec& l : {make_two_copy_variant(0.6, 0.6), make_hom_extended(0.3, 0.8)}) {
        for (double indist : {0.0, 0.5, 1.0}) {
            p.indistinguishability = indist;
            const ClickStats s = source_click_stats(p, l, DetectorModel::ideal(3));
            CHECK(s.p_error == 0.0);
            CHECK(s.p_success > 0.0);
        }
    }
}

TEST_CASE("bunching at a balanced first splitter doubles the coincidences behind it")
{
    SourceParams p;
    p.eta = 1.0;
    const LayoutSpec l = make_hom_extended(0.5, 0.5);
    p.indistinguishability = 1.0;
    const double same = source_click_stats(p, l, DetectorModel::ideal(3)).p_success;
    p.indistinguishability = 0.0;
    const double dist = source_click_stats(p, l, DetectorModel::ideal(3)).p_success;
    CHECK(dist == doctest::Approx(0.125));
    CHECK(same == doctest::Approx(0.25));
}

TEST_CASE("source statistics agree with the photon-number oracle")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 40; ++k) {
        for (auto kind : {LayoutKind::UnbalancedBS, LayoutKind::MachZehnder, LayoutKind::HomExtended,
                          LayoutKind::TwoCopyVariant}) {
            const LayoutSpec l = make_layout(kind, u(rng), u(rng), 6.2831853 * u(rng));
            SourceParams p;
            p.eta = u(rng);
            p.nbar = 0.2 * u(rng);
            p.signal_coherence = u(rng);
            p.noise_coherence = u(rng);
            p.indistinguishability = u(rng);
            DetectorModel det;
            for (int d = 0; d < l.modes(); ++d) {
                det.efficiencies.push_back(0.5 + 0.5 * u(rng));
            }
            const ClickStats a = source_click_stats(p, l, det);
            const ClickStats o = oracle_source_click_stats(p, l, det, 10);
            CHECK(std::abs(a.p_success - o.p_success) < 1e-12);
            CHECK(std::abs(a.p_error - o.p_error) < 1e-12);
        }
    }
}

TEST_CASE("HBT ratio estimate")
{
    const HbtRatio r = hbt_ratio_estimate(ClickStats{0.0505, 5e-5, Provenance::Ingested});
    CHECK(r.ratio == doctest::Approx(100.0).epsilon(0.05));
    CHECK(r.other_root * r.ratio == doctest::Approx(1.0));
    CHECK(hbt_ratio_estimate(ClickStats{0.1, 0.0, Provenance::Ingested}).unbounded);
    CHECK_THROWS_AS(hbt_ratio_estimate(ClickStats{0.01, 1e-3, Provenance::Ingested}), std::domain_error);

    SourceParams p;
    p.eta = 0.1;
    p.nbar = 1e-3;
    const ClickStats s = source_click_stats(p, make_unbalanced_bs(0.5), DetectorModel::ideal(2));
    CHECK(hbt_ratio_estimate(s).ratio == doctest::Approx(100.0).epsilon(0.05));
}

TEST_CASE("parameter validation")
{
    SourceParams p;
    p.eta = 1.2;
    CHECK_THROWS_AS(p.validate(), std::domain_error);
    p.eta = 0.5;
    p.nbar = -1.0;
    CHECK_THROWS_AS(p.validate(), std::domain_error);
    p.nbar = 0.1;
    p.indistinguishability = -0.1;
    CHECK_THROWS_AS(p.validate(), std::domain_error);
    CHECK_THROWS(single_copy_click_stats(SourceParams{}, make_hom_extended(0.5, 0.5), DetectorModel::ideal(3)));
}
