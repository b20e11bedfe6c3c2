#pragma once

/*
 * Strong-coupling classification.  A pointlike perturbation reshuffles levels
 * near energy omega only while the running coupling stays close to the
 * logarithmic center line; the distance from that line against the natural
 * threshold gives a three-way label.
 *
 * Point form:   |1/vbar - (mass/2pi) log(omega/lambda)|   vs  pi*mass/4.
 * Finite form:  |1/(u1*mass*area) - log(omega*mass*area)/2pi|  vs  pi/4,
 * the same quantity in the dimensionless coordinate u = 1/(v1*mass).
 */

#include <cstddef>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace billiard {

enum class CouplingStrength { strong, borderline, weak };

[[nodiscard]] inline const char* to_string(CouplingStrength s) noexcept {
    switch (s) {
        case CouplingStrength::strong: return "strong";
        case CouplingStrength::weak: return "weak";
        default: return "borderline";
    }
}

struct ClassificationReport {
    double metric = 0.0;
    double threshold = 0.0;
    CouplingStrength label = CouplingStrength::borderline;
    bool pointlike_valid = true;  // finite form only: omega below the size cutoff
};

// Labels use a hysteresis band around the nominal threshold so near-threshold
// couplings are reported as borderline instead of flapping.
[[nodiscard]] inline CouplingStrength label_from_metric(double metric, double threshold) {
    if (metric <= 0.5 * threshold)
        return CouplingStrength::strong;
    if (metric >= 1.5 * threshold)
        return CouplingStrength::weak;
    return CouplingStrength::borderline;
}

// Energy width over which a strong pointlike coupling disturbs the spectrum.
[[nodiscard]] inline double width_delta(double mass) {
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw std::invalid_argument("billiard.mass: must be positive and finite");
    return 0.5 * std::numbers::pi * mass;
}

[[nodiscard]] inline ClassificationReport point_metric(double vbar, double omega, double mass,
                                                       double lambda) {
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw std::invalid_argument("billiard.mass: must be positive and finite");
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw std::invalid_argument("omega: must be positive and finite");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("impurity.lambda: must be positive and finite");
    if (vbar == 0.0 || !std::isfinite(vbar))
        throw std::domain_error("impurity.vbar: decoupled or non-finite strength has no label");
    ClassificationReport rep;
    rep.metric = std::abs(1.0 / vbar
                          - mass / (2.0 * std::numbers::pi) * std::log(omega / lambda));
    rep.threshold = 0.25 * std::numbers::pi * mass;
    rep.label = label_from_metric(rep.metric, rep.threshold);
    return rep;
}

namespace detail {

// Metric in the dimensionless coordinate u = 1/(u1 * mass * area), given
// directly so a vanishing 1/u1 needs no special case.
[[nodiscard]] inline ClassificationReport finite_metric_from_u(double u, double mass,
                                                               double omega_area,
                                                               double omega) {
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw std::invalid_argument("omega: must be positive and finite");
    ClassificationReport rep;
    rep.metric = std::abs(u - std::log(omega * mass * omega_area)
                                  / (2.0 * std::numbers::pi));
    rep.threshold = 0.25 * std::numbers::pi;
    rep.label = label_from_metric(rep.metric, rep.threshold);
    rep.pointlike_valid = omega * mass * omega_area < 1.0;
    return rep;
}

}  // namespace detail

[[nodiscard]] inline ClassificationReport finite_metric(double u1, double mass,
                                                        double omega_area, double omega) {
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw std::invalid_argument("billiard.mass: must be positive and finite");
    if (!(omega_area > 0.0) || !std::isfinite(omega_area))
        throw std::invalid_argument("impurity area: must be positive and finite");
    if (u1 == 0.0 || !std::isfinite(u1))
        throw std::domain_error("impurity.u1: decoupled or non-finite height has no label");
    return detail::finite_metric_from_u(1.0 / (u1 * mass * omega_area), mass, omega_area,
                                        omega);
}

struct StripMap {
    std::vector<double> omegas;
    std::vector<double> u1_inverses;
    // Row-major over (omega row, u1_inverse column).
    std::vector<double> metrics;
    std::vector<CouplingStrength> labels;
    // Center line u1*(omega) of the strong-coupling strip in the 1/u1
    // coordinate, plus its exact half-widths.
    std::vector<double> center_u1_inverse;
    double half_width_u = 0.0;          // in u = 1/(u1 mass area): pi/4
    double half_width_u1_inverse = 0.0; // same strip width in the 1/u1 coordinate
};

// Classification raster over an (omega, 1/u1) grid, row-major, omega outer.
[[nodiscard]] inline StripMap strip_map(double mass, double omega_area, double omega_lo,
                                        double omega_hi, std::size_t n_omega,
                                        double u1_inv_lo, double u1_inv_hi,
                                        std::size_t n_u1) {
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw std::invalid_argument("billiard.mass: must be positive and finite");
    if (!(omega_area > 0.0) || !std::isfinite(omega_area))
        throw std::invalid_argument("impurity area: must be positive and finite");
    if (!(omega_lo > 0.0) || !(omega_hi > omega_lo))
        throw std::invalid_argument("strip.omega range: requires 0 < omega_min < omega_max");
    if (n_omega < 2 || n_u1 < 2)
        throw std::invalid_argument("strip grid: needs at least 2 samples per axis");
    if (!std::isfinite(u1_inv_lo) || !(u1_inv_hi > u1_inv_lo))
        throw std::invalid_argument("strip.u1_inv range: requires u1_inv_min < u1_inv_max");

    StripMap map;
    map.omegas.resize(n_omega);
    map.u1_inverses.resize(n_u1);
    map.center_u1_inverse.resize(n_omega);
    map.metrics.resize(n_omega * n_u1);
    map.labels.resize(n_omega * n_u1);
    map.half_width_u = 0.25 * std::numbers::pi;
    map.half_width_u1_inverse = map.half_width_u * mass * omega_area;

    for (std::size_t i = 0; i < n_omega; ++i)
        map.omegas[i] = omega_lo
            + (omega_hi - omega_lo) * static_cast<double>(i) / static_cast<double>(n_omega - 1);
    for (std::size_t j = 0; j < n_u1; ++j)
        map.u1_inverses[j] = u1_inv_lo
            + (u1_inv_hi - u1_inv_lo) * static_cast<double>(j) / static_cast<double>(n_u1 - 1);

    for (std::size_t i = 0; i < n_omega; ++i) {
        const double omega = map.omegas[i];
        map.center_u1_inverse[i] = mass * omega_area
            * std::log(omega * mass * omega_area) / (2.0 * std::numbers::pi);
        for (std::size_t j = 0; j < n_u1; ++j) {
            const double u = map.u1_inverses[j] / (mass * omega_area);
            const ClassificationReport rep =
                detail::finite_metric_from_u(u, mass, omega_area, omega);
            map.metrics[i * n_u1 + j] = rep.metric;
            map.labels[i * n_u1 + j] = rep.label;
        }
    }
    return map;
}

}  // namespace billiard
