// Click statistics of classical light: coherent states, optionally with
// randomized input phases, observed by binary (click / no-click) detectors.
#ifndef VNC_CLICK_MODEL_HPP
#define VNC_CLICK_MODEL_HPP

#include "vnc/detectors.hpp"
#include "vnc/layout.hpp"
#include "vnc/linear_network.hpp"

#include <span>
#include <vector>

namespace vnc {

inline constexpr int kDefaultQuadratureNodes = 256;
inline constexpr int kMinQuadratureNodes = 16;
inline constexpr int kMaxWatchedDetectors = 8;

enum class Provenance { Classical, Source, Ingested };

struct ClickStats {
    double p_success = 0.0;
    double p_error = 0.0;
    Provenance provenance = Provenance::Classical;
};

/// Coherent amplitudes on the layout's signal ports (one magnitude per entry
/// of LayoutSpec::input_ports). With phase_randomized the input phases are
/// averaged uniformly; otherwise fixed_phases (radians) are used.
struct ClassicalInput {
    std::vector<double> magnitudes;
    bool phase_randomized = true;
    std::vector<double> fixed_phases;

    void validate() const;
};

/// prod_{i in K} exp(-nu_i |u_i|^2).
double no_click_prob(const AmplitudeVectord& outputs, DetectorSet k, const DetectorModel& det);

/// prod_{i in K} (1 - exp(-nu_i |u_i|^2)), i.e. every detector in K clicks.
double all_click_prob(const AmplitudeVectord& outputs, DetectorSet k, const DetectorModel& det);

/// Full-length input vector v for the layout, with the given extra phase on
/// the second signal port.
AmplitudeVectord input_amplitudes(const LayoutSpec& layout, const ClassicalInput& input, double relative_phase = 0.0);

/// No-click probability of K averaged over the relative input phase with an
/// n-node trapezoid rule. A single driven port has nothing to average.
double phase_averaged_no_click(const LayoutSpec& layout, const ClassicalInput& input, DetectorSet k,
                               const DetectorModel& det, int nodes = kDefaultQuadratureNodes);

/// Closed form exp(-A) I0(2|B|) of the same average for two driven ports.
/// Valid while 2|B| stays below the double range of I0 (about 700).
double phase_averaged_no_click_bessel(const LayoutSpec& layout, const ClassicalInput& input, DetectorSet k,
                                      const DetectorModel& det);

/// (P_s, P_e) of a classical input. Each event probability is the phase
/// average of prod (1 - exp(-nu_i |u_i|^2)) over the event's detectors,
/// which keeps full relative precision for very weak light.
ClickStats classical_click_stats(const LayoutSpec& layout, const ClassicalInput& input, const DetectorModel& det,
                                 int nodes = kDefaultQuadratureNodes);

/// Same probabilities assembled from averaged no-click probabilities by
/// inclusion-exclusion, e.g. P_s = 1 - P0(1) - P0(2) + P0(1,2). Loses
/// relative precision once the probabilities approach machine epsilon.
ClickStats classical_click_stats_inclusion_exclusion(const LayoutSpec& layout, const ClassicalInput& input,
                                                     const DetectorModel& det, int nodes = kDefaultQuadratureNodes);

/// Precomputed evaluator for repeated (P_s, P_e) queries on one network, as
/// needed by the witness optimizer. Holds the efficiency-weighted transfer
/// columns of the driven ports and the quadrature phases.
class ClassicalClickEvaluator {
public:
    ClassicalClickEvaluator(const TransferMatrixd& transfer, std::span<const int> ports, DetectorSet success,
                            DetectorSet error, const DetectorModel& det, int nodes = kDefaultQuadratureNodes);

    ClassicalClickEvaluator(const LayoutSpec& layout, const DetectorModel& det, int nodes = kDefaultQuadratureNodes);

    int driven_ports() const { return static_cast<int>(columns_.size()); }

    /// Phase-randomized statistics for the given port magnitudes.
    ClickStats randomized(std::span<const double> magnitudes) const;

    /// Statistics for fixed input phases.
    ClickStats fixed(std::span<const double> magnitudes, std::span<const double> phases) const;

    /// Ports in mutually orthogonal modes: intensities add, nothing interferes.
    ClickStats distinguishable(std::span<const double> magnitudes) const;

private:
    using Column = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, 1, 0, kMaxWatchedDetectors, 1>;
    using Intensity = Eigen::Array<double, Eigen::Dynamic, 1, 0, kMaxWatchedDetectors, 1>;

    ClickStats from_intensities(const Intensity& intensity) const;

    std::vector<Column> columns_; // sqrt(nu_i) A_{i,port}, restricted to watched detectors
    std::vector<int> watched_;              // detectors in success | error
    std::uint32_t success_local_ = 0;       // masks over watched_
    std::uint32_t error_local_ = 0;
    std::vector<std::complex<double>> phasors_;
};

} // namespace vnc

#endif // VNC_CLICK_MODEL_HPP
