#pragma once

/*
 * Shared machinery for secular equations of the form
 *
 *     sum_n w_n / (omega - E_n) [+ regularizing constant + log tail] = target
 *
 * with w_n = phi_n(x1)^2 >= 0.  Between adjacent retained levels the left side
 * is strictly decreasing from +inf to -inf, so each simple interval holds
 * exactly one root; roots are isolated by bisection, which is the only method
 * that stays safe when a strong coupling pins the root against a pole.
 */

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "basis.hpp"

namespace billiard {

struct SeriesConfig {
    std::size_t n_max = 100000;   // retained modes for regularized sums
    bool tail_correction = true;  // analytic log tail for the dropped remainder
    double tol = 1e-10;           // absolute tolerance on root abscissae

    void validate() const {
        if (n_max < 100)
            throw std::invalid_argument("solver.n_max: must be at least 100");
        if (!(tol > 0.0) || !std::isfinite(tol))
            throw std::invalid_argument("solver.tol: must be positive and finite");
    }
};

struct EnergyWindow {
    double e_min = 0.0;
    double e_max = 0.0;

    void validate() const {
        if (!std::isfinite(e_min) || !std::isfinite(e_max) || !(e_min < e_max))
            throw std::invalid_argument("window: requires finite e_min < e_max");
    }
};

struct SpectralLine {
    double omega = 0.0;
    double bracket_lo = 0.0;   // interval that isolated the root
    double bracket_hi = 0.0;
    double residual = 0.0;     // |series(omega) - target|
    std::vector<double> coefficients;  // expansion over retained modes, unit norm
};

struct DegenerateCluster {
    double e_lo = 0.0;
    double e_hi = 0.0;
    int multiplicity = 0;
};

struct SpectrumResult {
    std::vector<SpectralLine> lines;
    std::vector<Mode> expansion_modes;         // retained modes the coefficients refer to
    std::vector<Mode> persistent_modes;        // levels whose weight vanishes at x1
    std::vector<DegenerateCluster> unresolved; // clusters too tight to separate
    double validity_limit = std::numeric_limits<double>::infinity();
};

// Relative gap below which two levels are treated as one degenerate cluster.
inline constexpr double kDegenerateRelGap = 1e-9;

// Weight threshold (relative to the eigenfunction scale 4/area) below which a
// level is dropped from the series and reported as a persistent eigenvalue.
inline constexpr double kWeightDropRel = 1e-12;

class SecularSeries {
public:
    enum class Kind { regularized, truncated };

    // Retains the given modes at x1, dropping zero-weight levels.  For the
    // regularized kind the constant subtraction sum_n w_n E_n/(E_n^2+L^2) is
    // folded in, and if `tail` is set the analytic remainder
    //     (mass/2pi) * log((E_c - omega)/sqrt(E_c^2 + L^2)),  E_c = top energy,
    // is added so values are stable against the retained-mode count.
    SecularSeries(const RectangleBilliard& b, Point x1, const std::vector<Mode>& modes,
                  Kind kind, double lambda, bool tail)
        : kind_(kind), lambda_(lambda), mass_(b.mass), tail_(tail && kind == Kind::regularized) {
        if (kind_ == Kind::regularized && (!(lambda > 0.0) || !std::isfinite(lambda)))
            throw std::invalid_argument("lambda: must be positive and finite");
        const double drop = kWeightDropRel * 4.0 / b.area();
        energies_.reserve(modes.size());
        weights_.reserve(modes.size());
        double e_top = 0.0;
        for (const Mode mo : modes) {
            const double phi = eigenfunction_value(b, mo, x1.x, x1.y);
            const double w = phi * phi;
            const double e = mode_energy(b, mo);
            e_top = std::max(e_top, e);
            if (w < drop) {
                dropped_.push_back(mo);
                continue;
            }
            energies_.push_back(e);
            weights_.push_back(w);
            retained_.push_back(mo);
            if (kind_ == Kind::regularized)
                const_shift_ += w * e / (e * e + lambda_ * lambda_);
        }
        if (energies_.empty())
            throw std::invalid_argument("secular series: no modes retained at x1");
        e_cut_ = e_top;
    }

    [[nodiscard]] const std::vector<double>& energies() const noexcept { return energies_; }
    [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }
    [[nodiscard]] const std::vector<Mode>& retained_modes() const noexcept { return retained_; }
    [[nodiscard]] const std::vector<Mode>& dropped_modes() const noexcept { return dropped_; }
    [[nodiscard]] double cutoff_energy() const noexcept { return e_cut_; }

    // Series value at omega.  Rejects omega within ~8 ulp of a retained level,
    // where the pole term is pure rounding noise.
    [[nodiscard]] double operator()(double omega) const {
        if (!std::isfinite(omega))
            throw std::invalid_argument("omega: must be finite");
        if (tail_ && omega >= e_cut_)
            throw std::domain_error("omega: must lie below the retained-mode cutoff");
        double sum = const_shift_;
        const double eps = std::numeric_limits<double>::epsilon();
        for (std::size_t i = 0; i < energies_.size(); ++i) {
            const double d = omega - energies_[i];
            if (std::abs(d) <= 8.0 * eps * std::max(std::abs(energies_[i]), 1.0))
                throw std::domain_error("omega: coincides with a retained level (pole)");
            sum += weights_[i] / d;
        }
        if (tail_)
            sum += mass_ / (2.0 * std::numbers::pi)
                   * std::log((e_cut_ - omega) / std::hypot(e_cut_, lambda_));
        return sum;
    }

private:
    Kind kind_;
    double lambda_ = 1.0;
    double mass_ = 1.0;
    bool tail_ = false;
    double const_shift_ = 0.0;
    double e_cut_ = 0.0;
    std::vector<double> energies_;
    std::vector<double> weights_;
    std::vector<Mode> retained_;
    std::vector<Mode> dropped_;
};

// Normalized expansion coefficients of an eigenfunction at energy omega over
// the retained modes of a series: c_n proportional to phi_n(x1)/(omega - E_n).
[[nodiscard]] inline std::vector<double>
expansion_coefficients(const SecularSeries& s, const RectangleBilliard& b, Point x1,
                       double omega) {
    const auto& modes = s.retained_modes();
    const auto& e = s.energies();
    std::vector<double> c(modes.size());
    double norm2 = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        c[i] = eigenfunction_value(b, modes[i], x1.x, x1.y) / (omega - e[i]);
        norm2 += c[i] * c[i];
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : c)
        v *= inv;
    return c;
}

namespace detail {

// Groups ascending energies into clusters with relative gap <= kDegenerateRelGap.
// Returns (first index, count) per cluster.
inline std::vector<std::pair<std::size_t, std::size_t>>
cluster_levels(const std::vector<double>& energies) {
    std::vector<std::pair<std::size_t, std::size_t>> clusters;
    std::size_t i = 0;
    while (i < energies.size()) {
        std::size_t j = i + 1;
        while (j < energies.size()
               && energies[j] - energies[j - 1]
                      <= kDegenerateRelGap * std::max(std::abs(energies[j]), 1.0))
            ++j;
        clusters.emplace_back(i, j - i);
        i = j;
    }
    return clusters;
}

// One root of series(omega) = target on (e_lo, e_hi), where the left side
// decreases from +inf at e_lo+ to -inf at e_hi-.  Endpoints start a relative
// distance 1e-9 inside the interval and shrink toward the pole whenever the
// root is pinned closer to it than that.
inline SpectralLine bisect_interval(const SecularSeries& series, double target,
                                    double e_lo, double e_hi, double tol) {
    const double eps = std::numeric_limits<double>::epsilon();
    const double span = e_hi - e_lo;
    const double eps_floor = 64.0 * eps;

    double rel = 1e-9;
    double a = 0.0, fa = 0.0;
    bool found_lo = false;
    while (rel >= eps_floor) {
        a = e_lo + rel * std::max(std::abs(e_lo), span);
        if (a >= e_hi)
            a = e_lo + 0.25 * span;
        try {
            fa = series(a) - target;
        } catch (const std::domain_error&) {
            break;
        }
        if (fa > 0.0) {
            found_lo = true;
            break;
        }
        rel /= 16.0;
    }

    rel = 1e-9;
    double b = 0.0, fb = 0.0;
    bool found_hi = false;
    while (rel >= eps_floor) {
        b = e_hi - rel * std::max(std::abs(e_hi), span);
        if (b <= e_lo)
            b = e_hi - 0.25 * span;
        try {
            fb = series(b) - target;
        } catch (const std::domain_error&) {
            break;
        }
        if (fb < 0.0) {
            found_hi = true;
            break;
        }
        rel /= 16.0;
    }

    SpectralLine line;
    line.bracket_lo = e_lo;
    line.bracket_hi = e_hi;
    if (!found_lo || !found_hi || a >= b) {
        // Root indistinguishable from one of the poles at double precision.
        line.omega = found_lo ? b : a;
        line.residual = std::numeric_limits<double>::infinity();
        return line;
    }

    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a + b);
        if (b - a <= std::max(tol, 4.0 * eps * std::abs(mid)))
            break;
        if (series(mid) - target > 0.0)
            a = mid;
        else
            b = mid;
    }
    line.omega = 0.5 * (a + b);
    line.residual = std::abs(series(line.omega) - target);
    return line;
}

}  // namespace detail

// Roots of series(omega) = target over every simple inter-level interval that
// meets the window, plus bound-state candidates below the ground level located
// by a dense sign scan.  Degenerate clusters are reported, not split.
inline SpectrumResult solve_secular(const SecularSeries& series, double target,
                                    const RectangleBilliard& b, EnergyWindow window,
                                    double tol) {
    window.validate();
    if (!std::isfinite(target))
        throw std::domain_error("coupling: secular target must be finite (non-decoupled)");

    const std::vector<double>& energies = series.energies();
    SpectrumResult out;
    out.persistent_modes = series.dropped_modes();

    const auto clusters = detail::cluster_levels(energies);
    for (const auto& [first, count] : clusters) {
        if (count > 1) {
            DegenerateCluster cl;
            cl.e_lo = energies[first];
            cl.e_hi = energies[first + count - 1];
            cl.multiplicity = static_cast<int>(count);
            if (cl.e_hi >= window.e_min && cl.e_lo <= window.e_max)
                out.unresolved.push_back(cl);
        }
    }

    // Below-ground search: dense sign scan from e_min (clamped to 50 mean level
    // spacings under the ground level) up to the first level.
    const double e_ground = energies.front();
    if (window.e_min < e_ground) {
        const double rho = mean_level_density(b);
        const double lo = std::max(window.e_min, e_ground - 50.0 / rho);
        const double hi = e_ground - 1e-9 * std::max(std::abs(e_ground), 1.0);
        if (lo < hi) {
            const int n_scan = 4096;
            double prev_x = lo;
            double prev_f = series(prev_x) - target;
            for (int i = 1; i <= n_scan; ++i) {
                const double x = lo + (hi - lo) * static_cast<double>(i) / n_scan;
                const double f = series(x) - target;
                if ((prev_f > 0.0 && f < 0.0) || (prev_f < 0.0 && f > 0.0)) {
                    double a = prev_x, fa2 = prev_f, bb = x;
                    for (int it = 0; it < 200; ++it) {
                        const double mid = 0.5 * (a + bb);
                        if (bb - a <= std::max(tol, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(mid)))
                            break;
                        const double fm = series(mid) - target;
                        if ((fa2 > 0.0) == (fm > 0.0)) {
                            a = mid;
                            fa2 = fm;
                        } else {
                            bb = mid;
                        }
                    }
                    SpectralLine line;
                    line.omega = 0.5 * (a + bb);
                    line.bracket_lo = prev_x;
                    line.bracket_hi = x;
                    line.residual = std::abs(series(line.omega) - target);
                    if (line.omega >= window.e_min && line.omega <= window.e_max)
                        out.lines.push_back(line);
                }
                prev_x = x;
                prev_f = f;
            }
        }
    }

    // Simple intervals between consecutive clusters.
    for (std::size_t c = 0; c + 1 < clusters.size(); ++c) {
        const double e_lo = energies[clusters[c].first + clusters[c].second - 1];
        const double e_hi = energies[clusters[c + 1].first];
        if (e_hi < window.e_min || e_lo > window.e_max)
            continue;
        SpectralLine line = detail::bisect_interval(series, target, e_lo, e_hi, tol);
        if (line.omega >= window.e_min && line.omega <= window.e_max)
            out.lines.push_back(line);
    }
    return out;
}

}  // namespace billiard
