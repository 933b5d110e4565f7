#include "vnc/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

namespace vnc {

namespace {

constexpr double kLogFloorMargin = 10.0; // refinement may go e^10 below the grid floor
constexpr double kTieRel = 1e-12;
constexpr double kVerdictRel = 1e-9;

struct LineResult {
    double x;
    double f;
};

// Brent's local maximization on [lo, hi]: golden section with parabolic
// steps, absolute x tolerance tol.
LineResult brent_max(const std::function<double(double)>& f, double lo, double hi, double tol)
{
    const double golden = 0.5 * (3.0 - std::sqrt(5.0));
    const double rel = 4.0 * std::numeric_limits<double>::epsilon();
    double a = lo;
    double b = hi;
    double x = a + golden * (b - a);
    double w = x;
    double v = x;
    double fx = -f(x);
    double fw = fx;
    double fv = fx;
    double d = 0.0;
    double e = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double m = 0.5 * (a + b);
        const double tol1 = rel * std::abs(x) + tol;
        const double tol2 = 2.0 * tol1;
        if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) {
            break;
        }
        double p = 0.0;
        double q = 0.0;
        double r = 0.0;
        if (std::abs(e) > tol1) {
            r = (x - w) * (fx - fv);
            q = (x - v) * (fx - fw);
            p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) {
                p = -p;
            } else {
                q = -q;
            }
            r = e;
            e = d;
        }
        if (std::abs(p) < std::abs(0.5 * q * r) && p > q * (a - x) && p < q * (b - x)) {
            d = p / q;
            const double u = x + d;
            if (u - a < tol2 || b - u < tol2) {
                d = x < m ? tol1 : -tol1;
            }
        } else {
            e = (x < m ? b : a) - x;
            d = golden * e;
        }
        const double u = x + (std::abs(d) >= tol1 ? d : (d > 0.0 ? tol1 : -tol1));
        const double fu = -f(u);
        if (fu <= fx) {
            (u < x ? b : a) = x;
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            (u < x ? a : b) = u;
            if (fu <= fw || w == x) {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u;
                fv = fu;
            }
        }
    }
    return {x, -fx};
}

// Line maximum near x0 with a bracket of half-width `half` that slides
// while the maximum sits on an interior bracket edge.
LineResult bracketed_max(const std::function<double(double)>& f, double x0, double f0, double lo_bound, double hi_bound,
                         double half, double tol)
{
    double centre = x0;
    LineResult best{x0, f0};
    for (int shift = 0; shift < 60; ++shift) {
        const double lo = std::max(centre - half, lo_bound);
        const double hi = std::min(centre + half, hi_bound);
        if (!(hi > lo)) {
            break;
        }
        const LineResult r = brent_max(f, lo, hi, tol);
        const bool improved = r.f > best.f;
        if (improved) {
            best = r;
        }
        const double edge = 10.0 * tol + 1e-9 * half;
        const bool on_lo = r.x - lo < edge && lo > lo_bound;
        const bool on_hi = hi - r.x < edge && hi < hi_bound;
        if (!improved || (!on_lo && !on_hi)) {
            break;
        }
        centre = on_hi ? hi + 0.5 * half : lo - 0.5 * half;
    }
    return best;
}

double total_magnitude(const std::vector<double>& m)
{
    return std::accumulate(m.begin(), m.end(), 0.0);
}

bool better(double w, const std::vector<double>& m, double w_ref, const std::vector<double>& m_ref)
{
    const double scale = std::max(std::abs(w), std::abs(w_ref));
    if (std::abs(w - w_ref) <= kTieRel * scale) {
        return total_magnitude(m) < total_magnitude(m_ref);
    }
    return w > w_ref;
}

LayoutSpec phase_zero(LayoutSpec layout)
{
    if (layout.kind == LayoutKind::MachZehnder) {
        layout.phase = 0.0;
    }
    return layout;
}

} // namespace

WitnessMaximizer::WitnessMaximizer(const TransferMatrixd& transfer, std::vector<int> ports, DetectorSet success,
                                   DetectorSet error, const DetectorModel& det, WitnessOptions opts)
    : eval_(transfer, ports, success, error, det, opts.quad_nodes), opts_(opts),
      dims_(static_cast<int>(ports.size()))
{
    if (dims_ < 1 || dims_ > 2) {
        throw std::invalid_argument("witness optimization supports one or two signal ports");
    }
    if (opts_.grid_points < 4) {
        throw std::invalid_argument("coarse grid needs at least 4 points per axis");
    }
    if (!(opts_.magnitude_cap > opts_.magnitude_floor) || !(opts_.magnitude_floor > 0.0)) {
        throw std::invalid_argument("need 0 < magnitude_floor < magnitude_cap");
    }
    const int g = opts_.grid_points;
    grid_.resize(g);
    grid_[0] = 0.0;
    const double l0 = std::log(opts_.magnitude_floor);
    const double l1 = std::log(opts_.magnitude_cap);
    for (int i = 1; i < g; ++i) {
        grid_[i] = i == g - 1 ? opts_.magnitude_cap : std::exp(l0 + (l1 - l0) * (i - 1) / (g - 2));
    }
    if (dims_ == 1) {
        table_.reserve(g);
        for (int i = 0; i < g; ++i) {
            const double m[1] = {grid_[i]};
            table_.push_back(eval_.randomized(m));
        }
    } else {
        table_.reserve(static_cast<std::size_t>(g) * g);
        for (int i = 0; i < g; ++i) {
            for (int j = 0; j < g; ++j) {
                const double m[2] = {grid_[i], grid_[j]};
                table_.push_back(eval_.randomized(m));
            }
        }
    }
}

WitnessMaximizer::WitnessMaximizer(const LayoutSpec& layout, const DetectorModel& det, WitnessOptions opts)
    : WitnessMaximizer(layout_transfer(phase_zero(layout)), layout.input_ports, layout.success, layout.error, det,
                       opts)
{
}

double WitnessMaximizer::witness(std::span<const double> magnitudes, double a) const
{
    const ClickStats s = eval_.randomized(magnitudes);
    return s.p_success + a * s.p_error;
}

WitnessMaximizer::Candidate WitnessMaximizer::refine(Candidate start, double a) const
{
    const double lo_bound = std::log(opts_.magnitude_floor) - kLogFloorMargin;
    const double hi_bound = std::log(opts_.magnitude_cap);
    const double half = 2.0 * (hi_bound - std::log(opts_.magnitude_floor)) / (opts_.grid_points - 2);
    const double tol = opts_.param_tol;

    std::vector<int> free;
    std::vector<double> s(dims_, 0.0);
    for (int d = 0; d < dims_; ++d) {
        if (start.magnitudes[d] > 0.0) {
            free.push_back(d);
            s[d] = std::log(start.magnitudes[d]);
        }
    }
    if (free.empty()) {
        return start;
    }
    std::vector<double> mags = start.magnitudes;
    auto eval_at = [&](const std::vector<double>& logs) {
        std::vector<double> m(dims_, 0.0);
        for (int d : free) {
            m[d] = std::exp(logs[d]);
        }
        return witness(m, a);
    };
    double w = eval_at(s);

    for (int sweep = 0; sweep < opts_.max_sweeps; ++sweep) {
        const std::vector<double> s_old = s;
        const double w_old = w;
        for (int d : free) {
            std::vector<double> trial = s;
            auto along = [&](double x) {
                trial[d] = x;
                return eval_at(trial);
            };
            const LineResult r = bracketed_max(along, s[d], w, lo_bound, hi_bound, half, tol);
            if (r.f > w) {
                s[d] = r.x;
                w = r.f;
            }
        }
        if (free.size() == 1) {
            if (std::abs(s[free[0]] - s_old[free[0]]) < tol || w <= w_old) {
                break;
            }
            continue;
        }
        // Powell move along the net displacement of the sweep
        std::vector<double> dir(dims_, 0.0);
        double step = 0.0;
        for (int d : free) {
            dir[d] = s[d] - s_old[d];
            step = std::max(step, std::abs(dir[d]));
        }
        if (step > tol) {
            double t_lo = -std::numeric_limits<double>::infinity();
            double t_hi = std::numeric_limits<double>::infinity();
            for (int d : free) {
                if (dir[d] == 0.0) {
                    continue;
                }
                const double ta = (lo_bound - s_old[d]) / dir[d];
                const double tb = (hi_bound - s_old[d]) / dir[d];
                t_lo = std::max(t_lo, std::min(ta, tb));
                t_hi = std::min(t_hi, std::max(ta, tb));
            }
            t_lo = std::max(t_lo, 0.0);
            t_hi = std::min(t_hi, 1.0 + 4.0 * half / step);
            if (t_hi > t_lo) {
                std::vector<double> trial = s_old;
                auto along = [&](double t) {
                    for (int d : free) {
                        trial[d] = s_old[d] + t * dir[d];
                    }
                    return eval_at(trial);
                };
                const LineResult r = brent_max(along, t_lo, t_hi, tol / step);
                if (r.f > w) {
                    for (int d : free) {
                        s[d] = s_old[d] + r.x * dir[d];
                    }
                    w = r.f;
                }
            }
        }
        double moved = 0.0;
        for (int d : free) {
            moved = std::max(moved, std::abs(s[d] - s_old[d]));
        }
        const double gain = w - w_old;
        if (moved < tol || gain <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w)) {
            break;
        }
    }
    for (int d : free) {
        mags[d] = std::exp(s[d]);
    }
    return Candidate{mags, w};
}

WitnessMax WitnessMaximizer::maximize(double a) const
{
    if (!(a < 0.0) || !std::isfinite(a)) {
        throw std::domain_error("witness parameter a must be finite and negative");
    }
    const int g = opts_.grid_points;
    auto w_at = [&](std::size_t idx) { return table_[idx].p_success + a * table_[idx].p_error; };

    std::vector<Candidate> starts;
    if (dims_ == 1) {
        std::vector<std::pair<double, int>> peaks;
        for (int i = 1; i < g; ++i) {
            const double w = w_at(i);
            const bool left = w >= w_at(i - 1);
            const bool right = i == g - 1 || w >= w_at(i + 1);
            if (left && right) {
                peaks.emplace_back(w, i);
            }
        }
        std::stable_sort(peaks.begin(), peaks.end(), [](auto& x, auto& y) { return x.first > y.first; });
        for (std::size_t k = 0; k < std::min<std::size_t>(peaks.size(), 3); ++k) {
            starts.push_back(Candidate{{grid_[peaks[k].second]}, peaks[k].first});
        }
    } else {
        auto idx = [g](int i, int j) { return static_cast<std::size_t>(i) * g + j; };
        std::vector<std::pair<double, std::pair<int, int>>> peaks;
        for (int i = 0; i < g; ++i) {
            for (int j = 0; j < g; ++j) {
                if (i == 0 && j == 0) {
                    continue;
                }
                const double w = w_at(idx(i, j));
                bool peak = true;
                for (int di = -1; di <= 1 && peak; ++di) {
                    for (int dj = -1; dj <= 1; ++dj) {
                        const int ni = i + di;
                        const int nj = j + dj;
                        if ((di == 0 && dj == 0) || ni < 0 || nj < 0 || ni >= g || nj >= g) {
                            continue;
                        }
                        if (w_at(idx(ni, nj)) > w) {
                            peak = false;
                            break;
                        }
                    }
                }
                if (peak) {
                    peaks.push_back({w, {i, j}});
                }
            }
        }
        std::stable_sort(peaks.begin(), peaks.end(), [](auto& x, auto& y) { return x.first > y.first; });
        for (std::size_t k = 0; k < std::min<std::size_t>(peaks.size(), 3); ++k) {
            const auto [i, j] = peaks[k].second;
            starts.push_back(Candidate{{grid_[i], grid_[j]}, peaks[k].first});
        }
        // best with one port dark, on each axis
        for (int axis = 0; axis < 2; ++axis) {
            int best = 1;
            for (int k = 2; k < g; ++k) {
                const std::size_t cur = axis == 0 ? idx(k, 0) : idx(0, k);
                const std::size_t ref = axis == 0 ? idx(best, 0) : idx(0, best);
                if (w_at(cur) > w_at(ref)) {
                    best = k;
                }
            }
            const std::size_t at = axis == 0 ? idx(best, 0) : idx(0, best);
            std::vector<double> m = axis == 0 ? std::vector<double>{grid_[best], 0.0}
                                              : std::vector<double>{0.0, grid_[best]};
            starts.push_back(Candidate{m, w_at(at)});
        }
    }

    double top = -std::numeric_limits<double>::infinity();
    for (const auto& c : starts) {
        top = std::max(top, c.w);
    }
    Candidate best{std::vector<double>(dims_, 0.0), 0.0};
    bool have = false;
    for (const auto& c : starts) {
        if (c.w < top - 0.5 * std::abs(top)) {
            continue;
        }
        const Candidate r = refine(c, a);
        if (!have || better(r.w, r.magnitudes, best.w, best.magnitudes)) {
            best = r;
            have = true;
        }
    }

    WitnessMax out;
    out.a = a;
    out.optimum.magnitudes = best.magnitudes;
    out.stats = eval_.randomized(best.magnitudes);
    out.w_max = out.stats.p_success + a * out.stats.p_error;
    for (double m : best.magnitudes) {
        out.at_cap = out.at_cap || m >= opts_.magnitude_cap - opts_.cap_tol;
    }
    return out;
}

WitnessMax maximize_witness(const LayoutSpec& layout, double a, const DetectorModel& det, const WitnessOptions& opts)
{
    return WitnessMaximizer(layout, det, opts).maximize(a);
}

std::vector<double> ASweep::values() const
{
    if (points < 2 || !(abs_min > 0.0) || !(abs_max > abs_min)) {
        throw std::invalid_argument("a sweep needs 0 < |a|_min < |a|_max and at least 2 points");
    }
    std::vector<double> a(points);
    const double l0 = std::log(abs_min);
    const double l1 = std::log(abs_max);
    for (int k = 0; k < points; ++k) {
        a[k] = -std::exp(l0 + (l1 - l0) * k / (points - 1));
    }
    a.front() = -abs_min;
    a.back() = -abs_max;
    return a;
}

double ThresholdCurve::witness_bound(double p_error) const
{
    double bound = 1.0;
    for (const auto& l : lines) {
        bound = std::min(bound, l.w_max - l.a * p_error);
    }
    return bound;
}

double ThresholdCurve::refined_bound(double p_error) const
{
    if (!solver || lines.size() < 2) {
        return witness_bound(p_error);
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        if (lines[k].w_max - lines[k].a * p_error < lines[best].w_max - lines[best].a * p_error) {
            best = k;
        }
    }
    const double swept = std::min(1.0, lines[best].w_max - lines[best].a * p_error);
    // W_max(a) - a P_e is convex in a; its minimum lies between the
    // neighbours of the best swept line
    const std::size_t lo = best == 0 ? 0 : best - 1;
    const std::size_t hi = std::min(best + 1, lines.size() - 1);
    const double s0 = std::log(std::min(-lines[lo].a, -lines[hi].a));
    const double s1 = std::log(std::max(-lines[lo].a, -lines[hi].a));
    auto negated = [&](double s) {
        const double a = -std::exp(s);
        return -(solver->maximize(a).w_max - a * p_error);
    };
    const LineResult r = brent_max(negated, s0, s1, 1e-4);
    return std::min(swept, -r.f);
}

std::vector<CurvePoint> enforce_envelope(std::vector<CurvePoint>& points)
{
    std::stable_sort(points.begin(), points.end(), [](const CurvePoint& x, const CurvePoint& y) {
        if (x.p_error != y.p_error) {
            return x.p_error < y.p_error;
        }
        return x.p_success > y.p_success;
    });
    std::vector<CurvePoint> removed;
    std::vector<CurvePoint> kept;
    auto same = [](const CurvePoint& x, const CurvePoint& y) {
        const double tol = 1e-13;
        return std::abs(x.p_error - y.p_error) <= tol * std::max(x.p_error, y.p_error) &&
               std::abs(x.p_success - y.p_success) <= tol * std::max(x.p_success, y.p_success);
    };
    for (auto& p : points) {
        if (!kept.empty() && same(kept.back(), p)) {
            continue; // the same optimum reached from several a
        }
        if (!kept.empty() && (p.p_error == kept.back().p_error || p.p_success < kept.back().p_success)) {
            removed.push_back(p);
            continue;
        }
        // upper hull: pop points lying strictly below the chord
        while (kept.size() >= 2) {
            const CurvePoint& l = kept[kept.size() - 2];
            const CurvePoint& m = kept.back();
            const double chord = l.p_success + (p.p_success - l.p_success) * (m.p_error - l.p_error) /
                                                   (p.p_error - l.p_error);
            if (m.p_success >= chord - 1e-10 * std::abs(chord)) {
                break;
            }
            removed.push_back(m);
            kept.pop_back();
        }
        kept.push_back(p);
    }
    points = std::move(kept);
    return removed;
}

bool is_monotone(std::span<const CurvePoint> points)
{
    for (std::size_t k = 1; k < points.size(); ++k) {
        if (!(points[k].p_error > points[k - 1].p_error) || points[k].p_success < points[k - 1].p_success) {
            return false;
        }
    }
    return true;
}

bool is_concave(std::span<const CurvePoint> points, double tol)
{
    for (std::size_t k = 2; k < points.size(); ++k) {
        const CurvePoint& l = points[k - 2];
        const CurvePoint& m = points[k - 1];
        const CurvePoint& r = points[k];
        const double chord =
            l.p_success + (r.p_success - l.p_success) * (m.p_error - l.p_error) / (r.p_error - l.p_error);
        if (m.p_success < chord - tol * std::abs(chord)) {
            return false;
        }
    }
    return true;
}

ThresholdCurve threshold_curve(const LayoutSpec& layout, const ASweep& sweep, const DetectorModel& det,
                               const WitnessOptions& opts)
{
    ThresholdCurve curve;
    curve.layout = layout;
    curve.a_values = sweep.values();
    auto solver = std::make_shared<const WitnessMaximizer>(layout, det, opts);

    const std::size_t n = curve.a_values.size();
    std::vector<WitnessMax> results(n);
    const unsigned workers = std::max(1U, std::min<unsigned>(std::thread::hardware_concurrency(), n));
    std::vector<std::exception_ptr> errors(workers);
    auto work = [&](unsigned id) {
        try {
            for (std::size_t k = id; k < n; k += workers) {
                results[k] = solver->maximize(curve.a_values[k]);
            }
        } catch (...) {
            errors[id] = std::current_exception();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned id = 0; id < workers; ++id) {
            pool.emplace_back(work, id);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }

    for (const auto& r : results) {
        curve.lines.push_back(SupportLine{r.a, r.w_max});
        CurvePoint p{r.a, r.w_max, r.stats.p_error, r.stats.p_success, r.optimum.magnitudes, r.at_cap};
        (r.at_cap ? curve.saturated : curve.points).push_back(std::move(p));
    }
    curve.discarded = enforce_envelope(curve.points);
    curve.solver = std::move(solver);
    return curve;
}

PowerLawFit power_law_fit(std::span<const double> p_error, std::span<const double> p_success, double pe_min,
                          double pe_max)
{
    if (p_error.size() != p_success.size()) {
        throw std::invalid_argument("P_e and P_s must have equal length");
    }
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t k = 0; k < p_error.size(); ++k) {
        if (p_error[k] >= pe_min && p_error[k] <= pe_max && p_error[k] > 0.0 && p_success[k] > 0.0) {
            x.push_back(std::log(p_error[k]));
            y.push_back(std::log(p_success[k]));
        }
    }
    if (static_cast<int>(x.size()) < kMinFitPoints) {
        throw std::runtime_error("power-law fit needs at least " + std::to_string(kMinFitPoints) +
                                 " points in the window, found " + std::to_string(x.size()));
    }
    Eigen::MatrixXd design(x.size(), 2);
    Eigen::VectorXd rhs(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        design(k, 0) = 1.0;
        design(k, 1) = x[k];
        rhs(k) = y[k];
    }
    const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
    PowerLawFit fit;
    fit.prefactor = std::exp(coef(0));
    fit.exponent = coef(1);
    fit.pe_min = pe_min;
    fit.pe_max = pe_max;
    fit.points = static_cast<int>(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        fit.residual = std::max(fit.residual, std::abs(std::exp(coef(0) + coef(1) * x[k] - y[k]) - 1.0));
    }
    return fit;
}

PowerLawFit power_law_fit(const ThresholdCurve& curve, double pe_min, double pe_max)
{
    std::vector<double> pe;
    std::vector<double> ps;
    for (const auto& p : curve.points) {
        pe.push_back(p.p_error);
        ps.push_back(p.p_success);
    }
    return power_law_fit(pe, ps, pe_min, pe_max);
}

double fixed_exponent_prefactor(const ThresholdCurve& curve, double exponent, double pe_min, double pe_max)
{
    double sum = 0.0;
    int count = 0;
    for (const auto& p : curve.points) {
        if (p.p_error >= pe_min && p.p_error <= pe_max && p.p_error > 0.0 && p.p_success > 0.0) {
            sum += std::log(p.p_success) - exponent * std::log(p.p_error);
            ++count;
        }
    }
    if (count < kMinFitPoints) {
        throw std::runtime_error("power-law fit needs at least " + std::to_string(kMinFitPoints) +
                                 " points in the window");
    }
    return std::exp(sum / count);
}

constexpr double kMaxExtrapolatedSlope = 1e12;

double threshold_at(const ThresholdCurve& curve, double p_error, bool* extrapolated)
{
    if (!(p_error >= 0.0)) {
        throw std::domain_error("P_e must be nonnegative");
    }
    bool outside = curve.points.empty() || p_error < curve.points.front().p_error ||
                   p_error > curve.points.back().p_error;
    if (!outside) {
        if (extrapolated != nullptr) {
            *extrapolated = false;
        }
        return curve.refined_bound(p_error);
    }
    const double bound = curve.witness_bound(p_error);
    double value = bound;
    const bool below = !curve.points.empty() && p_error < curve.points.front().p_error;
    if (below && p_error > 0.0 && curve.solver && !curve.lines.empty()) {
        // keep following the support function past the steepest swept line
        double steepest = 0.0;
        for (const auto& line : curve.lines) {
            steepest = std::max(steepest, -line.a);
        }
        const double s0 = std::log(steepest);
        const double s1 = std::min(std::log(kMaxExtrapolatedSlope),
                                   s0 + std::log(curve.points.front().p_error / p_error) + 1.0);
        if (s1 > s0) {
            auto negated = [&](double s) {
                const double a = -std::exp(s);
                return -(curve.solver->maximize(a).w_max - a * p_error);
            };
            value = std::min(bound, -brent_max(negated, s0, s1, 1e-4).f);
        }
    } else if (below && curve.points.size() >= 2) {
        const CurvePoint& p0 = curve.points[0];
        const CurvePoint& p1 = curve.points[1];
        if (p0.p_error > 0.0 && p0.p_success > 0.0 && p1.p_success > 0.0) {
            const double k = std::log(p1.p_success / p0.p_success) / std::log(p1.p_error / p0.p_error);
            value = std::min(bound, p0.p_success * std::pow(p_error / p0.p_error, k));
        }
    }
    if (extrapolated != nullptr) {
        *extrapolated = outside;
    }
    return value;
}

Verdict is_nonclassical(const ClickStats& stats, const ThresholdCurve& curve)
{
    if (!(stats.p_success >= 0.0) || !(stats.p_error >= 0.0) || stats.p_success > 1.0 + 1e-12 ||
        stats.p_error > 1.0 + 1e-12) {
        throw std::domain_error("click probabilities must lie in [0, 1]");
    }
    Verdict v;
    v.p_success_max = threshold_at(curve, stats.p_error, &v.low_confidence);
    v.margin = stats.p_success - v.p_success_max;
    v.nonclassical = v.margin > kVerdictRel * v.p_success_max;
    return v;
}

namespace {

// Geometric bisection of a verdict change of a positive parameter;
// lo_certifies says which side of the flip lo starts on.
template <typename F>
std::pair<double, double> bisect_flip(F&& certifies, double lo, double hi, bool lo_certifies)
{
    for (int iter = 0; iter < 200 && hi / lo > 1.0 + 1e-9; ++iter) {
        const double mid = std::sqrt(lo * hi);
        (certifies(mid) == lo_certifies ? lo : hi) = mid;
    }
    return {lo, hi};
}

using Judge = std::function<Verdict(const ClickStats&)>;

CriticalRatio noise_flip(const LayoutSpec& layout, const SourceParams& baseline, const DetectorModel& det,
                         const Judge& judge)
{
    baseline.validate();
    if (!(baseline.eta > 0.0)) {
        throw std::domain_error("critical ratio needs eta > 0");
    }
    bool low = false;
    auto certifies = [&](double nbar) {
        SourceParams p = baseline;
        p.nbar = nbar;
        const Verdict v = judge(source_click_stats(p, layout, det));
        low = v.low_confidence;
        return v.nonclassical;
    };
    const double lo = baseline.eta * 1e-6;
    const double hi = std::min(baseline.eta * 1e4, 50.0);
    if (!certifies(lo)) {
        throw NoFlipError("source is not certified even at nbar = " + std::to_string(lo));
    }
    if (certifies(hi)) {
        throw NoFlipError("source is still certified at nbar = " + std::to_string(hi));
    }
    const auto [a, b] = bisect_flip(certifies, lo, hi, true);
    const double nbar = std::sqrt(a * b);
    certifies(nbar);
    return CriticalRatio{baseline.eta / nbar, baseline.eta, nbar, low};
}

CriticalRatio eta_flip(const LayoutSpec& layout, const SourceParams& baseline, const DetectorModel& det,
                       const Judge& judge)
{
    baseline.validate();
    if (!(baseline.nbar > 0.0)) {
        throw std::domain_error("critical eta needs nbar > 0");
    }
    bool low = false;
    auto certifies = [&](double eta) {
        SourceParams p = baseline;
        p.eta = eta;
        const Verdict v = judge(source_click_stats(p, layout, det));
        low = v.low_confidence;
        return v.nonclassical;
    };
    const double lo = std::min(baseline.nbar * 1e-6, 0.5);
    const double hi = 1.0;
    if (certifies(lo)) {
        throw NoFlipError("source is certified even at eta = " + std::to_string(lo));
    }
    if (!certifies(hi)) {
        throw NoFlipError("source is not certified at eta = 1");
    }
    const auto [a, b] = bisect_flip(certifies, lo, hi, false);
    const double eta = std::sqrt(a * b);
    certifies(eta);
    return CriticalRatio{eta / baseline.nbar, eta, baseline.nbar, low};
}

Judge judge_curve(const ThresholdCurve& curve)
{
    return [&curve](const ClickStats& s) { return is_nonclassical(s, curve); };
}

Judge judge_fn(const ThresholdFn& threshold)
{
    return [&threshold](const ClickStats& s) {
        Verdict v;
        v.p_success_max = threshold(s.p_error);
        v.margin = s.p_success - v.p_success_max;
        v.nonclassical = v.margin > kVerdictRel * v.p_success_max;
        return v;
    };
}

} // namespace

CriticalRatio critical_noise_ratio(const LayoutSpec& layout, const SourceParams& baseline, const DetectorModel& det,
                                   const ThresholdCurve& curve)
{
    return noise_flip(layout, baseline, det, judge_curve(curve));
}

CriticalRatio critical_noise_ratio(const LayoutSpec& layout, const SourceParams& baseline, const DetectorModel& det,
                                   const ASweep& sweep, const WitnessOptions& opts)
{
    return critical_noise_ratio(layout, baseline, det, threshold_curve(layout, sweep, det, opts));
}

CriticalRatio critical_noise_ratio(const LayoutSpec& layout, const SourceParams& baseline, const DetectorModel& det,
                                   const ThresholdFn& threshold)
{
    return noise_flip(layout, baseline, det, judge_fn(threshold));
}

CriticalRatio critical_eta(const LayoutSpec& layout, const SourceParams& baseline, const DetectorModel& det,
                           const ThresholdCurve& curve)
{
    return eta_flip(layout, baseline, det, judge_curve(curve));
}

CriticalRatio critical_eta(const LayoutSpec& layout, const SourceParams& baseline, const DetectorModel& det,
                           const ThresholdFn& threshold)
{
    return eta_flip(layout, baseline, det, judge_fn(threshold));
}

double mz_linear_ratio(double t1, double t2, bool polychromatic)
{
    const double delta = t1 + t2 - 1.0;
    if (delta == 0.0) {
        throw std::domain_error("balanced Mach-Zehnder (Delta = 0) has no weak-light threshold");
    }
    const double r1 = 1.0 - t1;
    const double c = polychromatic ? 2.0 / (1.0 - 2.0 * t1 + 2.0 * t1 * t1) : 1.0;
    return 8.0 * t1 * t1 * r1 * r1 * c / (delta * delta);
}

double mz_prefactor(double t1, double t2)
{
    const double delta = t1 + t2 - 1.0;
    if (delta == 0.0) {
        throw std::domain_error("balanced Mach-Zehnder (Delta = 0) has no weak-light threshold");
    }
    return 2.0 * std::sqrt(t1 * (1.0 - t1)) / std::abs(delta);
}

double two_copy_tolerant_ratio(double t)
{
    if (!(t >= 0.0 && t <= 1.0)) {
        throw std::domain_error("transmission must lie in [0, 1]");
    }
    return std::sqrt(1.0 - t);
}

} // namespace vnc
