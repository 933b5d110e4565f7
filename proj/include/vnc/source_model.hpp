// Click statistics of realistic single-photon sources: a lossy single photon
// (efficiency eta) accompanied by independent Poissonian background (mean
// nbar), either as one copy through a two-detector layout or as two copies
// through a three-detector layout.
#ifndef VNC_SOURCE_MODEL_HPP
#define VNC_SOURCE_MODEL_HPP

#include "vnc/click_model.hpp"
#include "vnc/detectors.hpp"
#include "vnc/layout.hpp"

#include <Eigen/Dense>

namespace vnc {

struct SourceParams {
    double eta = 0.0;
    double nbar = 0.0;                  // per copy
    double signal_coherence = 1.0;      // 1 monochromatic, 0 polychromatic in the Mach-Zehnder
    double noise_coherence = 0.0;       // same, for the background
    double indistinguishability = 1.0;  // two-copy mode overlap of the photons

    void validate() const;
};

/// Where an emitted single photon lands, per detector; sums to one.
struct PhotonPlacement {
    Eigen::VectorXd probs;
};

/// Mach-Zehnder placement: weight signal_coherence on the interfering
/// intensities at the layout phase, the rest on the incoherent split
/// (T1 R2 + T2 R1, T1 T2 + R1 R2).
PhotonPlacement mz_photon_placement(const SourceParams& p, const LayoutSpec& layout);

/// Placement for either single-copy layout (UnbalancedBS gives (T, R)).
PhotonPlacement photon_placement(const SourceParams& p, const LayoutSpec& layout);

/// Poisson mean of background photons reaching each detector. Two-copy
/// layouts carry nbar on every signal port and never interfere it.
Eigen::VectorXd noise_detector_means(const SourceParams& p, const LayoutSpec& layout);

ClickStats single_copy_click_stats(const SourceParams& p, const LayoutSpec& layout, const DetectorModel& det);

ClickStats two_copy_click_stats(const SourceParams& p, const LayoutSpec& layout, const DetectorModel& det);

/// Dispatches on the layout kind.
ClickStats source_click_stats(const SourceParams& p, const LayoutSpec& layout, const DetectorModel& det);

/// eta / nbar inferred from a balanced HBT measurement through
/// P_s ~ (eta + nbar) / 2 and P_e ~ eta nbar / 2. The ratio x solves
/// x^2 - ((2 P_s)^2 / (2 P_e) - 2) x + 1 = 0; ratio is the root >= 1.
struct HbtRatio {
    double ratio = 0.0;
    double other_root = 0.0;
    bool unbounded = false;
};

HbtRatio hbt_ratio_estimate(const ClickStats& stats);

} // namespace vnc

#endif // VNC_SOURCE_MODEL_HPP
