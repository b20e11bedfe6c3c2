#pragma once

/*
 * Small rectangular potential step of height u1 over area omega_area = dlx*dly.
 *
 * When the impurity is small on every relevant wavelength it acts as a delta
 * potential of bare strength v1 = u1 * omega_area, but only on modes that do
 * not resolve its size.  Truncating the basis at E <= 1/(mass * omega_area)
 * turns the ill-defined delta sum into the finite secular equation
 *
 *     sum_{n <= N} phi_n(x1)^2 / (omega - E_n) = 1/v1 .
 *
 * The exact map to the renormalized point coupling evaluates the retained /
 * discarded split of the regularized series at the same energy.
 */

#include "secular.hpp"

namespace billiard {

struct RectImpurity {
    Point center;
    double dlx = 0.0;
    double dly = 0.0;
    double u1 = 0.0;  // potential height inside the impurity

    void validate(const RectangleBilliard& b) const {
        b.validate();
        if (!(dlx > 0.0) || !std::isfinite(dlx))
            throw std::invalid_argument("impurity.dlx: must be positive and finite");
        if (!(dly > 0.0) || !std::isfinite(dly))
            throw std::invalid_argument("impurity.dly: must be positive and finite");
        if (!std::isfinite(u1))
            throw std::invalid_argument("impurity.u1: must be finite");
        if (center.x - 0.5 * dlx < 0.0 || center.x + 0.5 * dlx > b.lx
            || center.y - 0.5 * dly < 0.0 || center.y + 0.5 * dly > b.ly)
            throw std::invalid_argument("impurity extent: must fit inside the rectangle");
    }

    [[nodiscard]] double area() const noexcept { return dlx * dly; }

    // Impurities that are not small against the box should be treated by the
    // dense solver, not the truncated delta model.
    [[nodiscard]] bool small_against(const RectangleBilliard& b) const noexcept {
        return area() <= 0.05 * b.area();
    }
};

// Bare delta strength of the step: height times area.
[[nodiscard]] inline double v1_from_potential(const RectImpurity& imp) {
    return imp.u1 * imp.area();
}

// Energy above which modes resolve the impurity size.
[[nodiscard]] inline double cutoff_energy(const RectangleBilliard& b, const RectImpurity& imp) {
    imp.validate(b);
    return 1.0 / (b.mass * imp.area());
}

// Number of retained modes: all with E_n <= 1/(mass * area).
[[nodiscard]] inline std::size_t cutoff_index(const RectangleBilliard& b,
                                              const RectImpurity& imp) {
    const double e_cut = cutoff_energy(b, imp);
    const std::size_t n = enumerate_modes(b, e_cut).size();
    if (n < 2)
        throw std::invalid_argument(
            "impurity extent: cutoff retains fewer than two modes (impurity too large)");
    return n;
}

namespace detail {

inline SecularSeries make_truncated_series(const RectangleBilliard& b, const RectImpurity& imp) {
    const double e_cut = cutoff_energy(b, imp);
    const std::vector<Mode> modes = enumerate_modes(b, e_cut);
    if (modes.size() < 2)
        throw std::invalid_argument(
            "impurity extent: cutoff retains fewer than two modes (impurity too large)");
    return SecularSeries(b, imp.center, modes, SecularSeries::Kind::truncated,
                         /*lambda=*/1.0, /*tail=*/false);
}

}  // namespace detail

// Spectrum of the truncated delta model.  Roots above half the cutoff energy
// (reported via validity_limit) leave the model's domain of validity.
[[nodiscard]] inline SpectrumResult truncated_secular_solve(const RectangleBilliard& b,
                                                            const RectImpurity& imp,
                                                            EnergyWindow window,
                                                            const SeriesConfig& cfg) {
    imp.validate(b);
    const double v1 = v1_from_potential(imp);
    if (v1 == 0.0)
        throw std::domain_error("impurity.u1: zero height is the unperturbed billiard");
    const SecularSeries s = detail::make_truncated_series(b, imp);
    SpectrumResult result = solve_secular(s, 1.0 / v1, b, window, cfg.tol);
    result.expansion_modes = s.retained_modes();
    result.validity_limit = 0.5 * s.cutoff_energy();
    for (SpectralLine& line : result.lines)
        line.coefficients = expansion_coefficients(s, b, imp.center, line.omega);
    return result;
}

// Renormalized coupling 1/vbar that reproduces a truncated-model level at
// energy omega: move the discarded part of the regularized series (evaluated
// with cfg.n_max modes and the analytic tail) to the coupling side.
[[nodiscard]] inline double vbar_inverse_from_v(const RectangleBilliard& b,
                                                const RectImpurity& imp, double omega,
                                                double lambda, const SeriesConfig& cfg) {
    imp.validate(b);
    const double v1 = v1_from_potential(imp);
    if (v1 == 0.0)
        throw std::domain_error("impurity.u1: zero height is the unperturbed billiard");
    const SecularSeries trunc = detail::make_truncated_series(b, imp);
    SeriesConfig reg_cfg = cfg;
    reg_cfg.n_max = std::max(cfg.n_max, trunc.energies().size());
    const SecularSeries reg = SecularSeries(b, imp.center, lowest_modes(b, reg_cfg.n_max),
                                            SecularSeries::Kind::regularized, lambda,
                                            reg_cfg.tail_correction);
    return 1.0 / v1 + (reg(omega) - trunc(omega));
}

// Leading smooth approximation of the same map:
//   1/vbar ~ 1/v1 + (mass/2pi) log((E_cut - omega)/lambda).
[[nodiscard]] inline double vbar_inverse_from_v_smooth(const RectangleBilliard& b,
                                                       const RectImpurity& imp, double omega,
                                                       double lambda) {
    imp.validate(b);
    const double v1 = v1_from_potential(imp);
    if (v1 == 0.0)
        throw std::domain_error("impurity.u1: zero height is the unperturbed billiard");
    const double e_cut = cutoff_energy(b, imp);
    if (omega >= e_cut)
        throw std::domain_error("omega: must lie below the impurity cutoff energy");
    return 1.0 / v1 + b.mass / (2.0 * std::numbers::pi) * std::log((e_cut - omega) / lambda);
}

}  // namespace billiard
