#include "vnc/source_model.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace vnc {

namespace {

void require_unit(double v, const char* name)
{
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::domain_error(std::string(name) + " must lie in [0, 1]");
    }
}

// Incoherent Mach-Zehnder split (T1 R2 + T2 R1, T1 T2 + R1 R2).
Eigen::Vector2d mz_incoherent_split(double t1, double t2)
{
    const double r1 = 1.0 - t1;
    const double r2 = 1.0 - t2;
    return {t1 * r2 + t2 * r1, t1 * t2 + r1 * r2};
}

Eigen::Vector2d mz_coherent_split(double t1, double t2, double phase)
{
    const double r1 = 1.0 - t1;
    const double r2 = 1.0 - t2;
    const double cross = 2.0 * std::cos(phase) * std::sqrt(t1 * t2 * r1 * r2);
    return {t1 * r2 + t2 * r1 + cross, t1 * t2 + r1 * r2 - cross};
}

// Probability that every detector in `pattern` fires, given k_i signal
// photons on detector i and Poisson background of mean m_i.
template <typename Occupation>
double all_fire(DetectorSet pattern, const Occupation& photons, const Eigen::VectorXd& means, const DetectorModel& det)
{
    double p = 1.0;
    for (int i : pattern.indices()) {
        const double nu = det.efficiency(i);
        const double dark = std::exp(-nu * means(i));
        const int k = photons[i];
        // 1 - (1 - nu)^k e^{-nu m}, written without cancellation for k = 0
        const double fire = k == 0 ? -std::expm1(-nu * means(i)) : 1.0 - std::pow(1.0 - nu, k) * dark;
        p *= fire;
    }
    return p;
}

} // namespace

void SourceParams::validate() const
{
    require_unit(eta, "eta");
    if (!(nbar >= 0.0) || !std::isfinite(nbar)) {
        throw std::domain_error("nbar must be finite and nonnegative");
    }
    require_unit(signal_coherence, "signal_coherence");
    require_unit(noise_coherence, "noise_coherence");
    require_unit(indistinguishability, "indistinguishability");
}

PhotonPlacement mz_photon_placement(const SourceParams& p, const LayoutSpec& layout)
{
    if (layout.kind != LayoutKind::MachZehnder) {
        throw std::invalid_argument("mz_photon_placement needs a Mach-Zehnder layout");
    }
    p.validate();
    const double v = p.signal_coherence;
    const Eigen::Vector2d probs = v * mz_coherent_split(layout.t1, layout.t2, layout.phase) +
                                  (1.0 - v) * mz_incoherent_split(layout.t1, layout.t2);
    return PhotonPlacement{probs.cwiseMax(0.0)};
}

PhotonPlacement photon_placement(const SourceParams& p, const LayoutSpec& layout)
{
    switch (layout.kind) {
    case LayoutKind::UnbalancedBS:
        p.validate();
        return PhotonPlacement{Eigen::Vector2d(layout.t1, 1.0 - layout.t1)};
    case LayoutKind::MachZehnder:
        return mz_photon_placement(p, layout);
    default:
        throw std::invalid_argument("single-photon placement is defined for single-copy layouts");
    }
}

Eigen::VectorXd noise_detector_means(const SourceParams& p, const LayoutSpec& layout)
{
    p.validate();
    switch (layout.kind) {
    case LayoutKind::UnbalancedBS:
        return p.nbar * Eigen::Vector2d(layout.t1, 1.0 - layout.t1);
    case LayoutKind::MachZehnder: {
        const double v = p.noise_coherence;
        const Eigen::Vector2d split = v * mz_coherent_split(layout.t1, layout.t2, layout.phase) +
                                      (1.0 - v) * mz_incoherent_split(layout.t1, layout.t2);
        return p.nbar * split.cwiseMax(0.0);
    }
    case LayoutKind::HomExtended:
    case LayoutKind::TwoCopyVariant: {
        const TransferMatrixd a = layout_transfer(layout);
        Eigen::VectorXd means = Eigen::VectorXd::Zero(a.rows());
        for (int port : layout.input_ports) {
            means += p.nbar * a.col(port).cwiseAbs2();
        }
        return means;
    }
    }
    throw std::invalid_argument("unknown layout kind");
}

ClickStats single_copy_click_stats(const SourceParams& p, const LayoutSpec& layout, const DetectorModel& det)
{
    if (layout.two_copy()) {
        throw std::invalid_argument("single_copy_click_stats needs a single-copy layout");
    }
    det.validate();
    const Eigen::VectorXd q = photon_placement(p, layout).probs;
    const Eigen::VectorXd m = noise_detector_means(p, layout);

    auto event = [&](DetectorSet pattern) {
        std::array<int, 2> photons{0, 0};
        double total = (1.0 - p.eta) * all_fire(pattern, photons, m, det);
        for (int j = 0; j < 2; ++j) {
            photons = {0, 0};
            photons[j] = 1;
            total += p.eta * q(j) * all_fire(pattern, photons, m, det);
        }
        return total;
    };
    return ClickStats{event(layout.success), event(layout.error), Provenance::Source};
}

ClickStats two_copy_click_stats(const SourceParams& p, const LayoutSpec& layout, const DetectorModel& det)
{
    if (!layout.two_copy()) {
        throw std::invalid_argument("two_copy_click_stats needs a two-copy layout");
    }
    det.validate();
    const Eigen::VectorXd m = noise_detector_means(p, layout);
    const TransferMatrixd a = layout_transfer(layout);
    const Eigen::VectorXcd ca = a.col(layout.input_ports[0]);
    const Eigen::VectorXcd cb = a.col(layout.input_ports[1]);
    const double eta = p.eta;
    const double same = p.indistinguishability;

    auto event = [&](DetectorSet pattern) {
        std::array<int, 3> photons{0, 0, 0};
        double total = (1.0 - eta) * (1.0 - eta) * all_fire(pattern, photons, m, det);
        // exactly one photon, from either copy
        for (int i = 0; i < 3; ++i) {
            photons = {0, 0, 0};
            photons[i] = 1;
            const double single = std::norm(ca(i)) + std::norm(cb(i));
            total += eta * (1.0 - eta) * single * all_fire(pattern, photons, m, det);
        }
        // both photons: bosonic amplitudes with weight `same`, labelled
        // (non-interfering) photons with weight 1 - same
        for (int i = 0; i < 3; ++i) {
            for (int j = i; j < 3; ++j) {
                photons = {0, 0, 0};
                ++photons[i];
                ++photons[j];
                double bosonic = 0.0;
                double labelled = 0.0;
                if (i == j) {
                    bosonic = 2.0 * std::norm(ca(i) * cb(i));
                    labelled = std::norm(ca(i)) * std::norm(cb(i));
                } else {
                    bosonic = std::norm(ca(i) * cb(j) + ca(j) * cb(i));
                    labelled = std::norm(ca(i)) * std::norm(cb(j)) + std::norm(ca(j)) * std::norm(cb(i));
                }
                const double weight = same * bosonic + (1.0 - same) * labelled;
                total += eta * eta * weight * all_fire(pattern, photons, m, det);
            }
        }
        return total;
    };
    return ClickStats{event(layout.success), event(layout.error), Provenance::Source};
}

ClickStats source_click_stats(const SourceParams& p, const LayoutSpec& layout, const DetectorModel& det)
{
    return layout.two_copy() ? two_copy_click_stats(p, layout, det) : single_copy_click_stats(p, layout, det);
}

HbtRatio hbt_ratio_estimate(const ClickStats& stats)
{
    const double ps = stats.p_success;
    const double pe = stats.p_error;
    if (!(ps > 0.0) || pe < 0.0) {
        throw std::domain_error("HBT ratio needs P_s > 0 and P_e >= 0");
    }
    if (pe == 0.0) {
        return HbtRatio{std::numeric_limits<double>::infinity(), 0.0, true};
    }
    const double b = 2.0 * ps * ps / pe - 2.0;
    if (b < 2.0) {
        throw std::domain_error("HBT statistics admit no real eta/nbar (P_s^2 < 2 P_e)");
    }
    const double root = 0.5 * (b + std::sqrt(b * b - 4.0));
    return HbtRatio{root, 1.0 / root, false};
}

} // namespace vnc
