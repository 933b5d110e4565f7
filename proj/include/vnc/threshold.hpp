// Classical maxima of the linear witness W_a = P_s + a P_e, the threshold
// curves they trace, power-law fits of the weak-light tail, and verdicts
// for measured or simulated click statistics.
#ifndef VNC_THRESHOLD_HPP
#define VNC_THRESHOLD_HPP

#include "vnc/click_model.hpp"
#include "vnc/detectors.hpp"
#include "vnc/layout.hpp"
#include "vnc/source_model.hpp"

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace vnc {

/// Thrown when an optimum sits on the magnitude cap and the caller asked
/// for strict handling.
class SolverBoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when a bisection finds no verdict change in its scan range.
class NoFlipError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct WitnessOptions {
    int grid_points = 64;          // per magnitude axis, including zero
    double magnitude_cap = 8.0;    // |alpha| <= cap
    double magnitude_floor = 1e-5; // smallest nonzero coarse-grid magnitude
    double param_tol = 1e-10;      // refinement tolerance in log-magnitude
    double cap_tol = 1e-6;
    int quad_nodes = kDefaultQuadratureNodes;
    int max_sweeps = 100;
};

struct WitnessMax {
    double a = 0.0;
    double w_max = 0.0;
    ClickStats stats;
    ClassicalInput optimum;
    bool at_cap = false;
};

/// Maximizes W_a over phase-randomized coherent inputs of one network.
///
/// The coarse grid (zero plus log-spaced magnitudes up to the cap) does not
/// depend on a, so it is tabulated once and reused for every a. The best
/// grid points, including the ones with an undriven port, are refined by
/// Brent line searches along the coordinates plus one Powell direction per
/// sweep, in log-magnitude.
class WitnessMaximizer {
public:
    WitnessMaximizer(const TransferMatrixd& transfer, std::vector<int> ports, DetectorSet success, DetectorSet error,
                     const DetectorModel& det, WitnessOptions opts = {});

    /// Layout form; the Mach-Zehnder is evaluated at phase 0, where the
    /// classical optimum lies.
    WitnessMaximizer(const LayoutSpec& layout, const DetectorModel& det, WitnessOptions opts = {});

    WitnessMax maximize(double a) const;

    const WitnessOptions& options() const { return opts_; }

private:
    struct Candidate {
        std::vector<double> magnitudes;
        double w = 0.0;
    };

    double witness(std::span<const double> magnitudes, double a) const;
    Candidate refine(Candidate start, double a) const;

    ClassicalClickEvaluator eval_;
    WitnessOptions opts_;
    int dims_ = 1;
    std::vector<double> grid_;
    std::vector<ClickStats> table_;
};

WitnessMax maximize_witness(const LayoutSpec& layout, double a, const DetectorModel& det,
                            const WitnessOptions& opts = {});

/// Log-spaced negative witness parameters, -abs_min down to -abs_max.
struct ASweep {
    double abs_min = 1e-2;
    double abs_max = 1e6;
    int points = 200;

    std::vector<double> values() const;
};

struct CurvePoint {
    double a = 0.0;
    double w_max = 0.0;
    double p_error = 0.0;
    double p_success = 0.0;
    std::vector<double> magnitudes;
    bool at_cap = false;
};

/// The line P_s = W_max(a) - a P_e bounding every classical point.
struct SupportLine {
    double a = 0.0;
    double w_max = 0.0;
};

struct ThresholdCurve {
    LayoutSpec layout;
    std::vector<CurvePoint> points;    // interior optima: sorted by P_e, nondecreasing, concave
    std::vector<CurvePoint> saturated; // optima on the magnitude cap
    std::vector<CurvePoint> discarded; // interior optima removed by the envelope filter
    std::vector<double> a_values;
    std::vector<SupportLine> lines;    // one per swept a, in sweep order

    /// Solver the curve was built with; lets threshold queries minimize
    /// over a between the swept values. Optional.
    std::shared_ptr<const WitnessMaximizer> solver;

    /// Smallest P_s allowed by the swept lines: min_a (W_max(a) - a P_e), capped at 1.
    double witness_bound(double p_error) const;

    /// Same minimum over the continuous a range of the sweep. Needs the solver;
    /// falls back to witness_bound without one.
    double refined_bound(double p_error) const;
};

ThresholdCurve threshold_curve(const LayoutSpec& layout, const ASweep& sweep, const DetectorModel& det,
                               const WitnessOptions& opts = {});

/// Drops points that break monotonicity or concavity and sorts by P_e.
/// Returns the removed points.
std::vector<CurvePoint> enforce_envelope(std::vector<CurvePoint>& points);

bool is_monotone(std::span<const CurvePoint> points);
bool is_concave(std::span<const CurvePoint> points, double tol = 1e-10);

struct PowerLawFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    double pe_min = 0.0;
    double pe_max = 0.0;
    double residual = 0.0; // max |fit / P_s - 1| over the window
    int points = 0;
};

inline constexpr int kMinFitPoints = 5;

/// Least-squares line ln P_s = ln f + k ln P_e over points with P_e in
/// [pe_min, pe_max].
PowerLawFit power_law_fit(std::span<const double> p_error, std::span<const double> p_success, double pe_min,
                          double pe_max);
PowerLawFit power_law_fit(const ThresholdCurve& curve, double pe_min, double pe_max);

/// f with the exponent held fixed: exp of the mean of ln P_s - k ln P_e.
double fixed_exponent_prefactor(const ThresholdCurve& curve, double exponent, double pe_min, double pe_max);

struct Verdict {
    bool nonclassical = false;
    double margin = 0.0; // P_s - P_s_max(P_e)
    double p_success_max = 0.0;
    bool low_confidence = false; // P_e outside the curve support
};

/// P_s_max(P_e) of the curve. Inside the support it is the refined witness
/// bound. Below it the support function is minimized over steeper slopes when
/// the curve has a solver (P_e = 0 or a loaded curve falls back to a power law
/// through the two weakest points); above it only the witness bound applies.
double threshold_at(const ThresholdCurve& curve, double p_error, bool* extrapolated = nullptr);

Verdict is_nonclassical(const ClickStats& stats, const ThresholdCurve& curve);

struct CriticalRatio {
    double ratio = 0.0; // eta / nbar at the verdict change
    double eta = 0.0;
    double nbar = 0.0;
    bool low_confidence = false;
};

/// Bisects nbar at the baseline eta until the verdict flips.
CriticalRatio critical_noise_ratio(const LayoutSpec& layout, const SourceParams& baseline, const DetectorModel& det,
                                   const ThresholdCurve& curve);
CriticalRatio critical_noise_ratio(const LayoutSpec& layout, const SourceParams& baseline, const DetectorModel& det,
                                   const ASweep& sweep = {}, const WitnessOptions& opts = {});

/// Same bisection against an arbitrary threshold P_e -> P_s_max, e.g. a
/// fitted power law. Verdicts use the same relative margin as is_nonclassical.
using ThresholdFn = std::function<double(double)>;
CriticalRatio critical_noise_ratio(const LayoutSpec& layout, const SourceParams& baseline, const DetectorModel& det,
                                   const ThresholdFn& threshold);

/// Bisects eta at the baseline nbar; the smallest eta that still certifies.
CriticalRatio critical_eta(const LayoutSpec& layout, const SourceParams& baseline, const DetectorModel& det,
                           const ThresholdCurve& curve);
CriticalRatio critical_eta(const LayoutSpec& layout, const SourceParams& baseline, const DetectorModel& det,
                           const ThresholdFn& threshold);

/// Weak-light Mach-Zehnder prediction eta/nbar > 8 T1^2 (1-T1)^2 C / Delta^2,
/// Delta = T1 + T2 - 1, with C = 1 for a monochromatic photon and
/// C = 2 / (1 - 2 T1 + 2 T1^2) for a polychromatic one.
double mz_linear_ratio(double t1, double t2, bool polychromatic);

/// Prefactor 2 sqrt(T (1-T)) / |Delta| of the Mach-Zehnder weak-light threshold.
double mz_prefactor(double t1, double t2);

/// Two-copy variant near full transmission: eta/nbar > sqrt(1 - T).
double two_copy_tolerant_ratio(double t);

} // namespace vnc

#endif // VNC_THRESHOLD_HPP
