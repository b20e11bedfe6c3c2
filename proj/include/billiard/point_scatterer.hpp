#pragma once

/*
 * Pointlike scatterer inside the rectangle, treated as a one-parameter
 * self-adjoint extension of the Laplacian restricted away from x1.
 *
 * The bare coupling of a 2D delta potential renormalizes to zero, so the
 * spectrum is defined through the regularized secular equation
 *
 *   G(omega) = sum_n phi_n(x1)^2 [ 1/(omega - E_n) + E_n/(E_n^2 + L^2) ]
 *            = 1/vbar,
 *
 * where L > 0 fixes the reference scale of the extension parameter theta via
 * 1/vbar = L cot(theta/2) sum_n phi_n(x1)^2 / (E_n^2 + L^2).
 */

#include <complex>
#include <optional>

#include "secular.hpp"

namespace billiard {

struct PointScatterer {
    Point position;
    double lambda = 1.0;         // regularization scale L
    std::optional<double> theta; // extension angle in [0, 2pi)
    std::optional<double> vbar;  // formal strength; exactly one of theta/vbar set

    void validate(const RectangleBilliard& b) const {
        b.validate();
        if (!b.contains_open(position))
            throw std::invalid_argument("impurity position: must lie strictly inside the rectangle");
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw std::invalid_argument("impurity.lambda: must be positive and finite");
        if (theta.has_value() == vbar.has_value())
            throw std::invalid_argument("impurity coupling: exactly one of theta or vbar required");
        if (theta && (!std::isfinite(*theta) || *theta < 0.0 || *theta >= 2.0 * std::numbers::pi))
            throw std::invalid_argument("impurity.theta: must lie in [0, 2pi)");
        if (vbar && !std::isfinite(*vbar))
            throw std::invalid_argument("impurity.vbar: must be finite");
    }
};

namespace detail {

inline SecularSeries make_regularized_series(const RectangleBilliard& b, Point x1,
                                             double lambda, const SeriesConfig& cfg) {
    return SecularSeries(b, x1, lowest_modes(b, cfg.n_max), SecularSeries::Kind::regularized,
                         lambda, cfg.tail_correction);
}

// sum_n phi_n(x1)^2 / (E_n^2 + L^2) over the retained modes.
inline double lambda_weight_sum(const SecularSeries& s, double lambda) {
    double q = 0.0;
    const auto& e = s.energies();
    const auto& w = s.weights();
    for (std::size_t i = 0; i < e.size(); ++i)
        q += w[i] / (e[i] * e[i] + lambda * lambda);
    return q;
}

}  // namespace detail

// Unperturbed Green function sum_n phi_n(a) phi_n(c) / (omega - E_n) over the
// cfg.n_max lowest modes (no regularization, no tail).
[[nodiscard]] inline double bare_green(const RectangleBilliard& b, Point a, Point c,
                                       double omega, const SeriesConfig& cfg) {
    b.validate();
    const std::vector<Mode> modes = lowest_modes(b, cfg.n_max);
    const double eps = std::numeric_limits<double>::epsilon();
    double sum = 0.0;
    for (const Mode mo : modes) {
        const double e = mode_energy(b, mo);
        const double d = omega - e;
        if (std::abs(d) <= 8.0 * eps * std::max(std::abs(e), 1.0))
            throw std::domain_error("omega: coincides with a retained level (pole)");
        sum += eigenfunction_value(b, mo, a.x, a.y) * eigenfunction_value(b, mo, c.x, c.y) / d;
    }
    return sum;
}

// Regularized diagonal series G(omega) at x1; the quantity the secular
// equation compares against 1/vbar.
[[nodiscard]] inline double regularized_g(const RectangleBilliard& b, Point x1, double omega,
                                          double lambda, const SeriesConfig& cfg) {
    b.validate();
    return detail::make_regularized_series(b, x1, lambda, cfg)(omega);
}

// 1/vbar corresponding to the extension angle theta.  theta = 0 is the
// decoupled (free) system and maps to the distinguished value +infinity.
[[nodiscard]] inline double theta_to_vbar_inverse(const RectangleBilliard& b, Point x1,
                                                  double theta, double lambda,
                                                  const SeriesConfig& cfg) {
    b.validate();
    if (!std::isfinite(theta) || theta < 0.0 || theta >= 2.0 * std::numbers::pi)
        throw std::invalid_argument("impurity.theta: must lie in [0, 2pi)");
    if (theta == 0.0)
        return std::numeric_limits<double>::infinity();
    const SecularSeries s = detail::make_regularized_series(b, x1, lambda, cfg);
    const double q = detail::lambda_weight_sum(s, lambda);
    const double half = 0.5 * theta;
    return lambda * (std::cos(half) / std::sin(half)) * q;
}

// Formal strength vbar itself; infinite 1/vbar (theta = 0) maps to zero.
[[nodiscard]] inline double theta_to_vbar(const RectangleBilliard& b, Point x1, double theta,
                                          double lambda, const SeriesConfig& cfg) {
    const double inv = theta_to_vbar_inverse(b, x1, theta, lambda, cfg);
    if (std::isinf(inv))
        return 0.0;
    return 1.0 / inv;
}

// Overlap sum c(omega) = sum_n phi_n(x1)^2 / ((omega - E_n)(iL - E_n)).  The
// value at the conjugate reference point -iL is the complex conjugate.
[[nodiscard]] inline std::complex<double> c_overlap(const RectangleBilliard& b, Point x1,
                                                    double omega, double lambda,
                                                    const SeriesConfig& cfg) {
    b.validate();
    const SecularSeries s = detail::make_regularized_series(b, x1, lambda, cfg);
    const auto& e = s.energies();
    const auto& w = s.weights();
    const double eps = std::numeric_limits<double>::epsilon();
    std::complex<double> sum{0.0, 0.0};
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double d = omega - e[i];
        if (std::abs(d) <= 8.0 * eps * std::max(std::abs(e[i]), 1.0))
            throw std::domain_error("omega: coincides with a retained level (pole)");
        sum += w[i] / (d * std::complex<double>(-e[i], lambda));
    }
    return sum;
}

namespace detail {

// Resolves the scatterer coupling to the secular target 1/vbar.
inline double vbar_inverse_of(const RectangleBilliard& b, const PointScatterer& sc,
                              const SeriesConfig& cfg) {
    if (sc.vbar) {
        if (*sc.vbar == 0.0)
            return std::numeric_limits<double>::infinity();
        return 1.0 / *sc.vbar;
    }
    return theta_to_vbar_inverse(b, sc.position, *sc.theta, sc.lambda, cfg);
}

}  // namespace detail

// Scattering amplitude T(omega) of the extension.  Zero identically when
// theta = 0; poles exactly at the secular roots G(omega) = 1/vbar.
[[nodiscard]] inline std::complex<double> transition_matrix(const RectangleBilliard& b,
                                                            const PointScatterer& sc,
                                                            double omega,
                                                            const SeriesConfig& cfg) {
    sc.validate(b);
    const SecularSeries s = detail::make_regularized_series(b, sc.position, sc.lambda, cfg);
    const double q = detail::lambda_weight_sum(s, sc.lambda);

    std::complex<double> phase;  // e^{i theta}
    if (sc.theta) {
        if (*sc.theta == 0.0)
            return {0.0, 0.0};
        phase = std::polar(1.0, *sc.theta);
    } else {
        if (*sc.vbar == 0.0)
            return {0.0, 0.0};
        // cot(theta/2) = (1/vbar) / (L q) determines the angle.
        const double ct = (1.0 / *sc.vbar) / (sc.lambda * q);
        const double den = ct * ct + 1.0;
        phase = {(ct * ct - 1.0) / den, 2.0 * ct / den};
    }
    const double g = s(omega);
    const std::complex<double> one{1.0, 0.0};
    const std::complex<double> i_unit{0.0, 1.0};
    const std::complex<double> num = phase - one;
    const std::complex<double> den = num * g - i_unit * (sc.lambda * q) * (phase + one);
    return num / den;
}

// Normalized expansion coefficients at energy omega; modes align with
// retained_modes() of the regularized series for the identical config.
[[nodiscard]] inline std::vector<double>
eigenfunction_coefficients(const RectangleBilliard& b, Point x1, double omega,
                           const SeriesConfig& cfg, double lambda = 1.0) {
    b.validate();
    const SecularSeries s = detail::make_regularized_series(b, x1, lambda, cfg);
    return expansion_coefficients(s, b, x1, omega);
}

// Full perturbed spectrum in the window.  Each line carries its normalized
// expansion coefficients over result.expansion_modes.
[[nodiscard]] inline SpectrumResult solve_point_spectrum(const RectangleBilliard& b,
                                                         const PointScatterer& sc,
                                                         EnergyWindow window,
                                                         const SeriesConfig& cfg) {
    sc.validate(b);
    cfg.validate();
    const SecularSeries s = detail::make_regularized_series(b, sc.position, sc.lambda, cfg);
    const double target = detail::vbar_inverse_of(b, sc, cfg);
    SpectrumResult result = solve_secular(s, target, b, window, cfg.tol);
    result.expansion_modes = s.retained_modes();
    result.validity_limit = 0.5 * s.cutoff_energy();
    for (SpectralLine& line : result.lines)
        line.coefficients = expansion_coefficients(s, b, sc.position, line.omega);
    return result;
}

// Partial sums of the unregularized diagonal series at increasing retained
// counts; grows logarithmically, which is why the bare delta coupling is empty.
[[nodiscard]] inline std::vector<double>
delta_divergence_profile(const RectangleBilliard& b, Point x1, double omega,
                         const std::vector<std::size_t>& n_values) {
    b.validate();
    if (n_values.empty())
        return {};
    std::size_t n_top = 0;
    for (std::size_t n : n_values) {
        if (n == 0)
            throw std::invalid_argument("n_values: retained counts must be positive");
        n_top = std::max(n_top, n);
    }
    const std::vector<Mode> modes = lowest_modes(b, n_top);
    std::vector<std::size_t> order(n_values.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t c) { return n_values[a] < n_values[c]; });

    std::vector<double> out(n_values.size());
    double sum = 0.0;
    std::size_t done = 0;
    const double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t idx : order) {
        for (; done < n_values[idx]; ++done) {
            const Mode mo = modes[done];
            const double e = mode_energy(b, mo);
            const double d = omega - e;
            if (std::abs(d) <= 8.0 * eps * std::max(std::abs(e), 1.0))
                throw std::domain_error("omega: coincides with a retained level (pole)");
            const double phi = eigenfunction_value(b, mo, x1.x, x1.y);
            sum += phi * phi / d;
        }
        out[idx] = sum;
    }
    return out;
}

}  // namespace billiard
