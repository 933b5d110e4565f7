#include "vnc/click_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vnc {

namespace {

void check_detectors(DetectorSet k, Eigen::Index modes)
{
    if (k.max_index() >= modes) {
        throw std::out_of_range("detector index " + std::to_string(k.max_index()) + " exceeds " +
                                std::to_string(modes) + " network outputs");
    }
}

void check_nodes(int nodes)
{
    if (nodes < kMinQuadratureNodes) {
        throw std::invalid_argument("phase quadrature needs at least " + std::to_string(kMinQuadratureNodes) +
                                    " nodes");
    }
}

int count_driven(const ClassicalInput& input)
{
    int driven = 0;
    for (double m : input.magnitudes) {
        driven += m > 0.0 ? 1 : 0;
    }
    return driven;
}

// Trapezoid average over the relative phase of the second driven port.
template <typename F>
double average_relative_phase(const LayoutSpec& layout, const ClassicalInput& input, int nodes, F&& integrand)
{
    const TransferMatrixd m = layout_transfer(layout);
    if (count_driven(input) < 2) {
        return integrand(propagate(m, input_amplitudes(layout, input)));
    }
    check_nodes(nodes);
    double sum = 0.0;
    for (int k = 0; k < nodes; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / nodes;
        sum += integrand(propagate(m, input_amplitudes(layout, input, theta)));
    }
    return sum / nodes;
}

} // namespace

void ClassicalInput::validate() const
{
    for (double m : magnitudes) {
        if (!std::isfinite(m) || m < 0.0) {
            throw std::domain_error("coherent magnitudes must be finite and nonnegative");
        }
    }
    if (!phase_randomized && !fixed_phases.empty() && fixed_phases.size() != magnitudes.size()) {
        throw std::invalid_argument("fixed_phases must give one phase per input port");
    }
}

double no_click_prob(const AmplitudeVectord& outputs, DetectorSet k, const DetectorModel& det)
{
    check_detectors(k, outputs.size());
    double exponent = 0.0;
    for (int i : k.indices()) {
        exponent += det.efficiency(i) * std::norm(outputs(i));
    }
    return std::exp(-exponent);
}

double all_click_prob(const AmplitudeVectord& outputs, DetectorSet k, const DetectorModel& det)
{
    check_detectors(k, outputs.size());
    double p = 1.0;
    for (int i : k.indices()) {
        p *= -std::expm1(-det.efficiency(i) * std::norm(outputs(i)));
    }
    return p;
}

AmplitudeVectord input_amplitudes(const LayoutSpec& layout, const ClassicalInput& input, double relative_phase)
{
    input.validate();
    if (input.magnitudes.size() != layout.input_ports.size()) {
        throw std::invalid_argument("layout has " + std::to_string(layout.input_ports.size()) +
                                    " signal ports but the input gives " + std::to_string(input.magnitudes.size()) +
                                    " magnitudes");
    }
    AmplitudeVectord v = AmplitudeVectord::Zero(layout.modes());
    for (std::size_t p = 0; p < input.magnitudes.size(); ++p) {
        double phase = 0.0;
        if (!input.phase_randomized && !input.fixed_phases.empty()) {
            phase = input.fixed_phases[p];
        }
        if (p == 1) {
            phase += relative_phase;
        }
        v(layout.input_ports[p]) = std::polar(input.magnitudes[p], phase);
    }
    return v;
}

double phase_averaged_no_click(const LayoutSpec& layout, const ClassicalInput& input, DetectorSet k,
                               const DetectorModel& det, int nodes)
{
    return average_relative_phase(layout, input, nodes,
                                  [&](const AmplitudeVectord& u) { return no_click_prob(u, k, det); });
}

double phase_averaged_no_click_bessel(const LayoutSpec& layout, const ClassicalInput& input, DetectorSet k,
                                      const DetectorModel& det)
{
    input.validate();
    const TransferMatrixd m = layout_transfer(layout);
    check_detectors(k, m.rows());
    if (layout.input_ports.size() != 2 || input.magnitudes.size() != 2) {
        throw std::invalid_argument("closed-form phase average needs exactly two signal ports");
    }
    const double x = input.magnitudes[0];
    const double y = input.magnitudes[1];
    double a = 0.0;
    std::complex<double> b = 0.0;
    for (int i : k.indices()) {
        const double nu = det.efficiency(i);
        const std::complex<double> c0 = m(i, layout.input_ports[0]) * x;
        const std::complex<double> c1 = m(i, layout.input_ports[1]) * y;
        a += nu * (std::norm(c0) + std::norm(c1));
        b += nu * std::conj(c0) * c1;
    }
    return std::exp(-a) * std::cyl_bessel_i(0.0, 2.0 * std::abs(b));
}

ClickStats classical_click_stats(const LayoutSpec& layout, const ClassicalInput& input, const DetectorModel& det,
                                 int nodes)
{
    input.validate();
    ClassicalClickEvaluator eval(layout, det, nodes);
    if (input.magnitudes.size() != layout.input_ports.size()) {
        throw std::invalid_argument("input magnitudes do not match the layout's signal ports");
    }
    if (input.phase_randomized) {
        return eval.randomized(input.magnitudes);
    }
    std::vector<double> phases = input.fixed_phases;
    phases.resize(input.magnitudes.size(), 0.0);
    return eval.fixed(input.magnitudes, phases);
}

ClickStats classical_click_stats_inclusion_exclusion(const LayoutSpec& layout, const ClassicalInput& input,
                                                     const DetectorModel& det, int nodes)
{
    // P(all of S click) = sum_{J subset of S} (-1)^|J| P0(J), P0(empty) = 1.
    auto all_click = [&](DetectorSet s) {
        const std::uint32_t mask = s.mask();
        double total = 0.0;
        for (std::uint32_t sub = mask;; sub = (sub - 1) & mask) {
            const DetectorSet j = DetectorSet::from_mask(sub);
            const double p0 = j.empty() ? 1.0
                              : input.phase_randomized
                                  ? phase_averaged_no_click(layout, input, j, det, nodes)
                                  : no_click_prob(propagate(layout_transfer(layout), input_amplitudes(layout, input)),
                                                  j, det);
            total += (j.size() % 2 == 0 ? 1.0 : -1.0) * p0;
            if (sub == 0) {
                break;
            }
        }
        return total;
    };
    return ClickStats{all_click(layout.success), all_click(layout.error), Provenance::Classical};
}

ClassicalClickEvaluator::ClassicalClickEvaluator(const TransferMatrixd& transfer, std::span<const int> ports,
                                                 DetectorSet success, DetectorSet error, const DetectorModel& det,
                                                 int nodes)
{
    check_nodes(nodes);
    det.validate();
    const DetectorSet watched = DetectorSet::from_mask(success.mask() | error.mask());
    check_detectors(watched, transfer.rows());
    watched_ = watched.indices();
    if (watched_.size() > static_cast<std::size_t>(kMaxWatchedDetectors)) {
        throw std::invalid_argument("too many watched detectors");
    }
    for (std::size_t w = 0; w < watched_.size(); ++w) {
        if (success.contains(watched_[w])) {
            success_local_ |= 1U << w;
        }
        if (error.contains(watched_[w])) {
            error_local_ |= 1U << w;
        }
    }
    for (int port : ports) {
        if (port < 0 || port >= transfer.cols()) {
            throw std::out_of_range("input port " + std::to_string(port) + " outside the network");
        }
        Column col(static_cast<Eigen::Index>(watched_.size()));
        for (std::size_t w = 0; w < watched_.size(); ++w) {
            col(static_cast<Eigen::Index>(w)) = std::sqrt(det.efficiency(watched_[w])) * transfer(watched_[w], port);
        }
        columns_.push_back(std::move(col));
    }
    phasors_.reserve(nodes);
    for (int k = 0; k < nodes; ++k) {
        phasors_.push_back(std::polar(1.0, 2.0 * std::numbers::pi * k / nodes));
    }
}

ClassicalClickEvaluator::ClassicalClickEvaluator(const LayoutSpec& layout, const DetectorModel& det, int nodes)
    : ClassicalClickEvaluator(layout_transfer(layout), layout.input_ports, layout.success, layout.error, det, nodes)
{
}

ClickStats ClassicalClickEvaluator::from_intensities(const Intensity& intensity) const
{
    double ps = 1.0;
    double pe = 1.0;
    for (Eigen::Index w = 0; w < intensity.size(); ++w) {
        const double click = -std::expm1(-intensity(w));
        if ((success_local_ >> w) & 1U) {
            ps *= click;
        }
        if ((error_local_ >> w) & 1U) {
            pe *= click;
        }
    }
    return ClickStats{ps, pe, Provenance::Classical};
}

ClickStats ClassicalClickEvaluator::randomized(std::span<const double> magnitudes) const
{
    if (magnitudes.size() != columns_.size()) {
        throw std::invalid_argument("expected one magnitude per driven port");
    }
    int first = -1;
    int second = -1;
    for (std::size_t p = 0; p < magnitudes.size(); ++p) {
        if (magnitudes[p] < 0.0 || !std::isfinite(magnitudes[p])) {
            throw std::domain_error("coherent magnitudes must be finite and nonnegative");
        }
        if (magnitudes[p] == 0.0) {
            continue;
        }
        if (first < 0) {
            first = static_cast<int>(p);
        } else if (second < 0) {
            second = static_cast<int>(p);
        } else {
            throw std::invalid_argument("phase averaging supports at most two driven ports");
        }
    }
    const Eigen::Index n = static_cast<Eigen::Index>(watched_.size());
    if (first < 0) {
        return ClickStats{0.0, 0.0, Provenance::Classical};
    }
    const Column a = columns_[first] * magnitudes[first];
    if (second < 0) {
        return from_intensities(a.cwiseAbs2().array());
    }
    const Column b = columns_[second] * magnitudes[second];
    // |a_i + b_i e^{i theta}|^2 = |a_i|^2 + |b_i|^2 + 2 Re(conj(a_i) b_i e^{i theta})
    const Intensity base = a.cwiseAbs2().array() + b.cwiseAbs2().array();
    const Column cross = 2.0 * a.conjugate().cwiseProduct(b);
    double ps = 0.0;
    double pe = 0.0;
    Intensity intensity(n);
    for (const auto& z : phasors_) {
        intensity = base + (cross * z).real().array();
        const ClickStats s = from_intensities(intensity.max(0.0));
        ps += s.p_success;
        pe += s.p_error;
    }
    const double count = static_cast<double>(phasors_.size());
    return ClickStats{ps / count, pe / count, Provenance::Classical};
}

ClickStats ClassicalClickEvaluator::fixed(std::span<const double> magnitudes, std::span<const double> phases) const
{
    if (magnitudes.size() != columns_.size() || phases.size() != columns_.size()) {
        throw std::invalid_argument("expected one magnitude and phase per driven port");
    }
    Column u = Column::Zero(static_cast<Eigen::Index>(watched_.size()));
    for (std::size_t p = 0; p < columns_.size(); ++p) {
        u += columns_[p] * std::polar(magnitudes[p], phases[p]);
    }
    return from_intensities(u.cwiseAbs2().array());
}

ClickStats ClassicalClickEvaluator::distinguishable(std::span<const double> magnitudes) const
{
    if (magnitudes.size() != columns_.size()) {
        throw std::invalid_argument("expected one magnitude per driven port");
    }
    Intensity intensity = Intensity::Zero(static_cast<Eigen::Index>(watched_.size()));
    for (std::size_t p = 0; p < columns_.size(); ++p) {
        intensity += columns_[p].cwiseAbs2().array() * (magnitudes[p] * magnitudes[p]);
    }
    return from_intensities(intensity);
}

} // namespace vnc
