#include "vnc/fock_oracle.hpp"

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <string>

namespace vnc {

namespace {

using Occupation = std::vector<int>;
using Poly = std::map<Occupation, std::complex<double>>;

double factorial(int n)
{
    return std::tgamma(n + 1.0);
}

void check_cutoff(int cutoff)
{
    if (cutoff < kMinCutoff) {
        throw std::invalid_argument("cutoff must be at least " + std::to_string(kMinCutoff));
    }
}

double poisson_tail(double mean, int cutoff)
{
    if (mean <= 0.0) {
        return 0.0;
    }
    double term = std::exp(-mean);
    for (int n = 1; n <= cutoff; ++n) {
        term *= mean / n;
    }
    double tail = 0.0;
    for (int n = cutoff + 1; n < cutoff + 400; ++n) {
        term *= mean / n;
        tail += term;
        if (term < 1e-30 * tail) {
            break;
        }
    }
    return tail;
}

std::vector<double> poisson_weights(double mean, int cutoff, double tail_tol)
{
    const double tail = poisson_tail(mean, cutoff);
    if (tail >= tail_tol) {
        throw TailMassError("Poisson mean " + std::to_string(mean) + " leaves tail mass " + std::to_string(tail) +
                            " beyond cutoff " + std::to_string(cutoff) + "; need cutoff " +
                            std::to_string(required_cutoff(mean, tail_tol)));
    }
    std::vector<double> w(cutoff + 1);
    for (int n = 0; n <= cutoff; ++n) {
        w[n] = std::exp(-mean + n * std::log(mean > 0.0 ? mean : 1.0) - std::lgamma(n + 1.0));
    }
    if (mean <= 0.0) {
        std::fill(w.begin(), w.end(), 0.0);
        w[0] = 1.0;
    }
    return w;
}

// Multiplies the creation polynomial by sum_i coeffs(i) z_i.
Poly times_linear(const Poly& p, const Eigen::VectorXcd& coeffs)
{
    Poly out;
    for (const auto& [k, c] : p) {
        for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
            if (coeffs(i) == 0.0) {
                continue;
            }
            Occupation next = k;
            ++next[i];
            out[next] += c * coeffs(i);
        }
    }
    return out;
}

// Output occupation probabilities of one interfering group:
// |coef_k|^2 prod k_i! / prod n_p! of prod_p (sum_i A_ip z_i)^{n_p}.
std::map<Occupation, double> propagate_interfering(const TransferMatrixd& a, const std::vector<int>& ports,
                                                   const std::vector<int>& photons)
{
    const int modes = static_cast<int>(a.rows());
    Poly poly{{Occupation(modes, 0), 1.0}};
    double norm = 1.0;
    for (std::size_t c = 0; c < photons.size(); ++c) {
        const Eigen::VectorXcd col = a.col(ports[c]);
        for (int r = 0; r < photons[c]; ++r) {
            poly = times_linear(poly, col);
        }
        norm *= factorial(photons[c]);
    }
    std::map<Occupation, double> out;
    for (const auto& [k, coef] : poly) {
        double weight = std::norm(coef) / norm;
        for (int n : k) {
            weight *= factorial(n);
        }
        out[k] += weight;
    }
    return out;
}

// Photon-by-photon placement with per-port landing probabilities.
std::map<Occupation, double> propagate_incoherent(const Eigen::MatrixXd& landing, const std::vector<int>& ports,
                                                  const std::vector<int>& photons)
{
    const int modes = static_cast<int>(landing.rows());
    std::map<Occupation, double> dist{{Occupation(modes, 0), 1.0}};
    for (std::size_t c = 0; c < photons.size(); ++c) {
        for (int r = 0; r < photons[c]; ++r) {
            std::map<Occupation, double> next;
            for (const auto& [k, w] : dist) {
                for (int i = 0; i < modes; ++i) {
                    const double p = landing(i, ports[c]);
                    if (p == 0.0) {
                        continue;
                    }
                    Occupation moved = k;
                    ++moved[i];
                    next[moved] += w * p;
                }
            }
            dist = std::move(next);
        }
    }
    return dist;
}

// Landing probabilities of a photon that cannot interfere across the
// Mach-Zehnder arms: |A|^2 averaged over the arm phase.
Eigen::MatrixXd incoherent_landing(const LayoutSpec& layout)
{
    if (layout.kind != LayoutKind::MachZehnder) {
        return layout_transfer(layout).cwiseAbs2();
    }
    constexpr int nodes = 16;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(layout.modes(), layout.modes());
    for (int k = 0; k < nodes; ++k) {
        sum += layout_transfer(layout, layout.phase + 2.0 * std::numbers::pi * k / nodes).cwiseAbs2();
    }
    return sum / nodes;
}

// Click pattern distribution of a known output occupation: each photon is
// registered with probability nu_i.
void add_clicks(const Occupation& k, double weight, const DetectorModel& det, std::vector<double>& patterns)
{
    const int modes = static_cast<int>(k.size());
    std::vector<double> miss(modes);
    for (int i = 0; i < modes; ++i) {
        miss[i] = std::pow(1.0 - det.efficiency(i), k[i]);
    }
    for (std::uint32_t s = 0; s < patterns.size(); ++s) {
        double p = weight;
        for (int i = 0; i < modes; ++i) {
            p *= ((s >> i) & 1U) ? 1.0 - miss[i] : miss[i];
        }
        patterns[s] += p;
    }
}

std::vector<double> or_convolve(const std::vector<double>& x, const std::vector<double>& y)
{
    std::vector<double> out(x.size(), 0.0);
    for (std::uint32_t s = 0; s < x.size(); ++s) {
        if (x[s] == 0.0) {
            continue;
        }
        for (std::uint32_t t = 0; t < y.size(); ++t) {
            out[s | t] += x[s] * y[t];
        }
    }
    return out;
}

} // namespace

double JointPhotonDist::total_weight() const
{
    double total = 0.0;
    for (const auto& b : branches) {
        total += b.weight;
    }
    return total;
}

int required_cutoff(double mean, double tol)
{
    int cutoff = kMinCutoff;
    while (poisson_tail(mean, cutoff) >= tol) {
        ++cutoff;
        if (cutoff > 200) {
            throw TailMassError("Poisson mean too large for a truncated expansion");
        }
    }
    return cutoff;
}

JointPhotonDist build_source_dist(const SourceParams& p, int copies, int cutoff, double tail_tol)
{
    p.validate();
    check_cutoff(cutoff);
    if (copies != 1 && copies != 2) {
        throw std::invalid_argument("copies must be 1 or 2");
    }
    JointPhotonDist dist;
    dist.copies = copies;
    dist.cutoff = cutoff;

    // independent factors, each a list of (weight, groups)
    using Factor = std::vector<std::pair<double, std::vector<PhotonGroup>>>;
    std::vector<Factor> factors;
    auto on_copy = [copies](int c, int n) {
        std::vector<int> photons(copies, 0);
        photons[c] = n;
        return photons;
    };

    if (copies == 1) {
        const double v = p.signal_coherence;
        factors.push_back({{1.0 - p.eta, {}},
                           {p.eta * v, {PhotonGroup{{1}, false}}},
                           {p.eta * (1.0 - v), {PhotonGroup{{1}, true}}}});
        const double vn = p.noise_coherence;
        for (bool incoherent : {false, true}) {
            const double mean = p.nbar * (incoherent ? 1.0 - vn : vn);
            const auto w = poisson_weights(mean, cutoff, tail_tol);
            Factor f;
            for (int n = 0; n <= cutoff; ++n) {
                if (w[n] > 0.0) {
                    f.push_back({w[n], n == 0 ? std::vector<PhotonGroup>{}
                                              : std::vector<PhotonGroup>{PhotonGroup{on_copy(0, n), incoherent}}});
                }
            }
            factors.push_back(std::move(f));
        }
    } else {
        const double e = p.eta;
        const double same = p.indistinguishability;
        factors.push_back({{(1.0 - e) * (1.0 - e), {}},
                           {e * (1.0 - e), {PhotonGroup{{1, 0}, false}}},
                           {(1.0 - e) * e, {PhotonGroup{{0, 1}, false}}},
                           {e * e * same, {PhotonGroup{{1, 1}, false}}},
                           {e * e * (1.0 - same), {PhotonGroup{{1, 0}, false}, PhotonGroup{{0, 1}, false}}}});
        const auto w = poisson_weights(p.nbar, cutoff, tail_tol);
        for (int c = 0; c < 2; ++c) {
            Factor f;
            for (int n = 0; n <= cutoff; ++n) {
                if (w[n] > 0.0) {
                    f.push_back({w[n], n == 0 ? std::vector<PhotonGroup>{}
                                              : std::vector<PhotonGroup>{PhotonGroup{on_copy(c, n), false}}});
                }
            }
            factors.push_back(std::move(f));
        }
    }

    dist.branches.push_back(PhotonBranch{1.0, {}});
    for (const auto& f : factors) {
        std::vector<PhotonBranch> next;
        for (const auto& b : dist.branches) {
            for (const auto& [w, groups] : f) {
                if (w == 0.0) {
                    continue;
                }
                PhotonBranch nb = b;
                nb.weight *= w;
                nb.groups.insert(nb.groups.end(), groups.begin(), groups.end());
                next.push_back(std::move(nb));
            }
        }
        dist.branches = std::move(next);
    }
    return dist;
}

JointPhotonDist build_coherent_dist(std::span<const double> magnitudes, int cutoff, double tail_tol)
{
    check_cutoff(cutoff);
    JointPhotonDist dist;
    dist.copies = static_cast<int>(magnitudes.size());
    dist.cutoff = cutoff;
    dist.branches.push_back(PhotonBranch{1.0, {PhotonGroup{std::vector<int>(magnitudes.size(), 0), false}}});
    for (std::size_t c = 0; c < magnitudes.size(); ++c) {
        const auto w = poisson_weights(magnitudes[c] * magnitudes[c], cutoff, tail_tol);
        std::vector<PhotonBranch> next;
        for (const auto& b : dist.branches) {
            for (int n = 0; n <= cutoff; ++n) {
                if (w[n] == 0.0) {
                    continue;
                }
                PhotonBranch nb = b;
                nb.weight *= w[n];
                nb.groups[0].photons[c] = n;
                next.push_back(std::move(nb));
            }
        }
        dist.branches = std::move(next);
    }
    return dist;
}

double ClickPatternDist::all_of(DetectorSet s) const
{
    double total = 0.0;
    for (std::uint32_t m = 0; m < probs.size(); ++m) {
        if ((m & s.mask()) == s.mask()) {
            total += probs[m];
        }
    }
    return total;
}

double ClickPatternDist::total() const
{
    double total = 0.0;
    for (double p : probs) {
        total += p;
    }
    return total;
}

ClickPatternDist propagate_and_click(const JointPhotonDist& dist, const LayoutSpec& layout, const DetectorModel& det)
{
    det.validate();
    if (dist.copies != static_cast<int>(layout.input_ports.size())) {
        throw std::invalid_argument("distribution has " + std::to_string(dist.copies) + " copies but the layout has " +
                                    std::to_string(layout.input_ports.size()) + " signal ports");
    }
    const int modes = layout.modes();
    const TransferMatrixd a = layout_transfer(layout);
    const Eigen::MatrixXd landing = incoherent_landing(layout);
    const std::size_t patterns = std::size_t{1} << modes;

    std::map<std::pair<std::vector<int>, bool>, std::vector<double>> cache;
    auto group_clicks = [&](const PhotonGroup& g) -> const std::vector<double>& {
        const auto key = std::make_pair(g.photons, g.incoherent);
        auto it = cache.find(key);
        if (it != cache.end()) {
            return it->second;
        }
        for (int n : g.photons) {
            if (n < 0 || n > dist.cutoff * 2) {
                throw std::out_of_range("photon number outside the cutoff");
            }
        }
        const auto occ = g.incoherent ? propagate_incoherent(landing, layout.input_ports, g.photons)
                                      : propagate_interfering(a, layout.input_ports, g.photons);
        std::vector<double> clicks(patterns, 0.0);
        for (const auto& [k, w] : occ) {
            add_clicks(k, w, det, clicks);
        }
        return cache.emplace(key, std::move(clicks)).first->second;
    };

    ClickPatternDist out{modes, std::vector<double>(patterns, 0.0)};
    std::vector<double> none(patterns, 0.0);
    none[0] = 1.0;
    for (const auto& b : dist.branches) {
        std::vector<double> clicks = none;
        for (const auto& g : b.groups) {
            clicks = or_convolve(clicks, group_clicks(g));
        }
        for (std::size_t s = 0; s < patterns; ++s) {
            out.probs[s] += b.weight * clicks[s];
        }
    }
    return out;
}

ClickStats oracle_source_click_stats(const SourceParams& p, const LayoutSpec& layout, const DetectorModel& det,
                                     int cutoff)
{
    const auto dist = build_source_dist(p, static_cast<int>(layout.input_ports.size()), cutoff);
    const auto clicks = propagate_and_click(dist, layout, det);
    return ClickStats{clicks.all_of(layout.success), clicks.all_of(layout.error), Provenance::Source};
}

ClickStats oracle_coherent_click_stats(const LayoutSpec& layout, const ClassicalInput& input, const DetectorModel& det,
                                       int cutoff)
{
    input.validate();
    if (input.magnitudes.size() != layout.input_ports.size()) {
        throw std::invalid_argument("input magnitudes do not match the layout's signal ports");
    }
    if (input.phase_randomized) {
        const auto clicks = propagate_and_click(build_coherent_dist(input.magnitudes, cutoff), layout, det);
        return ClickStats{clicks.all_of(layout.success), clicks.all_of(layout.error), Provenance::Classical};
    }
    check_cutoff(cutoff);
    det.validate();
    // The output of a coherent input is one coherent state; expand it per
    // total photon number N as (sum_i beta_i z_i)^N / N!.
    const TransferMatrixd a = layout_transfer(layout);
    const int modes = layout.modes();
    Eigen::VectorXcd beta = Eigen::VectorXcd::Zero(modes);
    for (std::size_t c = 0; c < input.magnitudes.size(); ++c) {
        const double phase = c < input.fixed_phases.size() ? input.fixed_phases[c] : 0.0;
        beta += a.col(layout.input_ports[c]) * std::polar(input.magnitudes[c], phase);
    }
    const double mean = beta.squaredNorm();
    if (poisson_tail(mean, cutoff) >= kDefaultTailTol) {
        throw TailMassError("coherent input needs cutoff " + std::to_string(required_cutoff(mean)));
    }
    std::vector<double> clicks(std::size_t{1} << modes, 0.0);
    Poly poly{{Occupation(modes, 0), 1.0}};
    for (int n = 0; n <= cutoff; ++n) {
        if (n > 0) {
            poly = times_linear(poly, beta);
        }
        for (const auto& [k, coef] : poly) {
            double w = std::exp(-mean) * std::norm(coef) / (factorial(n) * factorial(n));
            for (int ki : k) {
                w *= factorial(ki);
            }
            add_clicks(k, w, det, clicks);
        }
    }
    ClickPatternDist d{modes, clicks};
    return ClickStats{d.all_of(layout.success), d.all_of(layout.error), Provenance::Classical};
}

} // namespace vnc
