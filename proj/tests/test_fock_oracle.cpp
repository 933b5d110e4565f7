#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vnc/fock_oracle.hpp"

#include <cmath>

using namespace vnc;

TEST_CASE("cutoff from the Poisson tail")
{
    CHECK(required_cutoff(0.0) == kMinCutoff);
    CHECK(required_cutoff(0.01) <= 5);
    CHECK(required_cutoff(0.2) == 9);
    CHECK(required_cutoff(1.0) > required_cutoff(0.2));
}

TEST_CASE("source distributions are normalized")
{
    SourceParams p;
    p.eta = 0.6;
    p.nbar = 0.05;
    p.signal_coherence = 0.4;
    p.noise_coherence = 0.3;
    p.indistinguishability = 0.7;
    CHECK(build_source_dist(p, 1).total_weight() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(build_source_dist(p, 2).total_weight() == doctest::Approx(1.0).epsilon(1e-12));
    const std::vector<double> mags{0.3, 0.2};
    CHECK(build_coherent_dist(mags).total_weight() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("truncation that drops too much mass is refused")
{
    SourceParams p;
    p.eta = 0.5;
    p.nbar = 2.0;
    CHECK_THROWS_AS(build_source_dist(p, 1, 6), TailMassError);
    CHECK_THROWS(build_source_dist(p, 1, kMinCutoff - 1));
    const std::vector<double> mags{3.0};
    CHECK_THROWS_AS(build_coherent_dist(mags, 8), TailMassError);
}

TEST_CASE("click pattern probabilities sum to one")
{
    SourceParams p;
    p.eta = 0.8;
    p.nbar = 0.1;
    for (const LayoutSpec& l : {make_mach_zehnder(0.3, 0.6), make_two_copy_variant(0.4, 0.9)}) {
        const DetectorModel det = DetectorModel::ideal(l.modes());
        const auto clicks = propagate_and_click(build_source_dist(p, l.two_copy() ? 2 : 1, 10), l, det);
        CHECK(clicks.total() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(clicks.all_of(DetectorSet{}) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("two identical photons leave a balanced splitter together")
{
    JointPhotonDist d;
    d.copies = 2;
    d.branches.push_back(PhotonBranch{1.0, {PhotonGroup{{1, 1}, false}}});
    const LayoutSpec l = make_hom_extended(0.5, 0.5);
    const auto clicks = propagate_and_click(d, l, DetectorModel::ideal(3));
    CHECK(clicks.all_of(DetectorSet{0, 2}) == doctest::Approx(0.0).scale(1.0));
    CHECK(clicks.all_of(DetectorSet{1, 2}) == doctest::Approx(0.0).scale(1.0));
    CHECK(clicks.all_of(DetectorSet{0, 1}) == doctest::Approx(0.25));

    d.branches[0].groups = {PhotonGroup{{1, 0}, false}, PhotonGroup{{0, 1}, false}};
    const auto labelled = propagate_and_click(d, l, DetectorModel::ideal(3));
    CHECK(labelled.all_of(DetectorSet{0, 2}) == doctest::Approx(0.25));
    CHECK(labelled.all_of(DetectorSet{0, 1}) == doctest::Approx(0.125));
}

TEST_CASE("binomial loss at the detectors")
{
    JointPhotonDist d;
    d.copies = 1;
    d.branches.push_back(PhotonBranch{1.0, {PhotonGroup{{3}, false}}});
    const LayoutSpec l = make_unbalanced_bs(1.0);
    const auto clicks = propagate_and_click(d, l, DetectorModel{{0.5, 1.0}});
    CHECK(clicks.all_of(DetectorSet{0}) == doctest::Approx(1.0 - 0.125));
    CHECK(clicks.all_of(DetectorSet{1}) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("single-port coherent light through the oracle")
{
    const LayoutSpec l = make_unbalanced_bs(0.3);
    const ClassicalInput in{{0.8}, true, {}};
    const ClickStats o = oracle_coherent_click_stats(l, in, DetectorModel::ideal(2), 14);
    const double c0 = -std::expm1(-0.64 * 0.3);
    const double c1 = -std::expm1(-0.64 * 0.7);
    CHECK(o.p_success == doctest::Approx(c0).epsilon(1e-12));
    CHECK(o.p_error == doctest::Approx(c0 * c1).epsilon(1e-12));
}

TEST_CASE("mismatched copies and ports are rejected")
{
    SourceParams p;
    p.eta = 0.5;
    CHECK_THROWS(propagate_and_click(build_source_dist(p, 1), make_hom_extended(0.5, 0.5), DetectorModel::ideal(3)));
}
