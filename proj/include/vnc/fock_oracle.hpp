// Brute-force photon-number simulator: truncated Fock expansions of the
// sources, exact multi-photon propagation and binomial detector loss.
// Slow and small; it exists to check the closed-form click probabilities.
#ifndef VNC_FOCK_ORACLE_HPP
#define VNC_FOCK_ORACLE_HPP

#include "vnc/click_model.hpp"
#include "vnc/detectors.hpp"
#include "vnc/layout.hpp"
#include "vnc/source_model.hpp"

#include <stdexcept>
#include <vector>

namespace vnc {

inline constexpr int kDefaultCutoff = 8;
inline constexpr int kMinCutoff = 4;
inline constexpr double kDefaultTailTol = 1e-12;

class TailMassError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Photons sharing one label. photons[c] sit on copy (signal port) c.
/// Photons of one group interfere with each other; an incoherent group
/// travels the Mach-Zehnder without arm interference, photon by photon.
struct PhotonGroup {
    std::vector<int> photons;
    bool incoherent = false;
};

/// One term of the mixture: independent, mutually distinguishable groups.
struct PhotonBranch {
    double weight = 0.0;
    std::vector<PhotonGroup> groups;
};

struct JointPhotonDist {
    int copies = 1;
    int cutoff = kDefaultCutoff;
    std::vector<PhotonBranch> branches;

    double total_weight() const;
};

/// Smallest cutoff whose Poisson tail beyond it is below tol.
int required_cutoff(double mean, double tol = kDefaultTailTol);

/// Lossy single photon plus Poisson background per copy. Partial
/// coherence and partial indistinguishability enter as mixtures.
JointPhotonDist build_source_dist(const SourceParams& p, int copies, int cutoff = kDefaultCutoff,
                                  double tail_tol = kDefaultTailTol);

/// Phase-randomized coherent states on the signal ports as Poisson mixtures
/// of Fock states in one common label.
JointPhotonDist build_coherent_dist(std::span<const double> magnitudes, int cutoff = kDefaultCutoff,
                                    double tail_tol = kDefaultTailTol);

/// Probabilities of all 2^modes click patterns, indexed by detector mask.
struct ClickPatternDist {
    int modes = 0;
    std::vector<double> probs;

    /// P(every detector of s clicks).
    double all_of(DetectorSet s) const;
    double total() const;
};

ClickPatternDist propagate_and_click(const JointPhotonDist& dist, const LayoutSpec& layout, const DetectorModel& det);

/// Source statistics through the oracle.
ClickStats oracle_source_click_stats(const SourceParams& p, const LayoutSpec& layout, const DetectorModel& det,
                                     int cutoff = kDefaultCutoff);

/// Coherent input statistics through the oracle. Fixed-phase inputs are
/// expanded as one coherent superposition per total photon number.
ClickStats oracle_coherent_click_stats(const LayoutSpec& layout, const ClassicalInput& input,
                                       const DetectorModel& det, int cutoff = kDefaultCutoff);

} // namespace vnc

#endif // VNC_FOCK_ORACLE_HPP
