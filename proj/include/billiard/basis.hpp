#pragma once

/*
 * Dirichlet modes of a 2D rectangular box.
 *
 * Energies E_{m,n} = ((m pi / lx)^2 + (n pi / ly)^2) / (2 mass), eigenfunctions
 * phi_{m,n}(x,y) = sqrt(4/(lx ly)) sin(m pi x / lx) sin(n pi y / ly), both with
 * m, n >= 1.  Enumeration is ordered by energy with lexicographic (m, n)
 * tie-break so every caller sees the same deterministic basis.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace billiard {

struct Mode {
    int m = 1;
    int n = 1;

    friend bool operator==(const Mode&, const Mode&) = default;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct RectangleBilliard {
    double lx = 1.0;
    double ly = 1.0;
    double mass = 1.0;

    void validate() const {
        if (!(lx > 0.0) || !std::isfinite(lx))
            throw std::invalid_argument("billiard.lx: must be positive and finite");
        if (!(ly > 0.0) || !std::isfinite(ly))
            throw std::invalid_argument("billiard.ly: must be positive and finite");
        if (!(mass > 0.0) || !std::isfinite(mass))
            throw std::invalid_argument("billiard.mass: must be positive and finite");
    }

    [[nodiscard]] double area() const noexcept { return lx * ly; }

    [[nodiscard]] bool contains_open(Point p) const noexcept {
        return p.x > 0.0 && p.x < lx && p.y > 0.0 && p.y < ly;
    }
};

inline void validate_mode(Mode mo) {
    if (mo.m < 1 || mo.n < 1)
        throw std::invalid_argument("mode: indices must satisfy m >= 1, n >= 1");
}

[[nodiscard]] inline double mode_energy(const RectangleBilliard& b, Mode mo) {
    validate_mode(mo);
    const double kx = static_cast<double>(mo.m) * std::numbers::pi / b.lx;
    const double ky = static_cast<double>(mo.n) * std::numbers::pi / b.ly;
    return (kx * kx + ky * ky) / (2.0 * b.mass);
}

// Value of the normalized eigenfunction at an interior or boundary point.
[[nodiscard]] inline double eigenfunction_value(const RectangleBilliard& b, Mode mo,
                                                double x, double y) {
    validate_mode(mo);
    const double amp = std::sqrt(4.0 / (b.lx * b.ly));
    return amp * std::sin(static_cast<double>(mo.m) * std::numbers::pi * x / b.lx)
               * std::sin(static_cast<double>(mo.n) * std::numbers::pi * y / b.ly);
}

// Smooth (Weyl) density of states: mass * area / (2 pi), independent of energy.
[[nodiscard]] inline double mean_level_density(const RectangleBilliard& b) {
    b.validate();
    return b.mass * b.lx * b.ly / (2.0 * std::numbers::pi);
}

// All modes with E_{m,n} <= e_max, sorted by (energy, m, n).
[[nodiscard]] inline std::vector<Mode> enumerate_modes(const RectangleBilliard& b,
                                                       double e_max) {
    b.validate();
    if (!std::isfinite(e_max))
        throw std::invalid_argument("e_max: must be finite");

    struct Entry {
        double e;
        Mode mo;
    };
    std::vector<Entry> entries;
    const double pi = std::numbers::pi;
    const double two_m_e = 2.0 * b.mass * e_max;
    for (int m = 1;; ++m) {
        const double kx = static_cast<double>(m) * pi / b.lx;
        const double rest = two_m_e - kx * kx;
        if (rest < (pi / b.ly) * (pi / b.ly))
            break;
        const int n_hi = static_cast<int>(std::floor(std::sqrt(rest) * b.ly / pi));
        for (int n = 1; n <= n_hi; ++n) {
            const Mode mo{m, n};
            const double e = mode_energy(b, mo);
            if (e <= e_max)
                entries.push_back({e, mo});
        }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& c) {
        if (a.e != c.e)
            return a.e < c.e;
        if (a.mo.m != c.mo.m)
            return a.mo.m < c.mo.m;
        return a.mo.n < c.mo.n;
    });
    std::vector<Mode> out;
    out.reserve(entries.size());
    for (const auto& en : entries)
        out.push_back(en.mo);
    return out;
}

// The `count` lowest modes in the same deterministic order.
[[nodiscard]] inline std::vector<Mode> lowest_modes(const RectangleBilliard& b,
                                                    std::size_t count) {
    b.validate();
    if (count == 0)
        return {};
    const double rho = mean_level_density(b);
    // Weyl estimate plus perimeter excess, padded; grown geometrically if short.
    double e_guess = (static_cast<double>(count)
                      + 2.0 * std::sqrt(static_cast<double>(count)) + 16.0) / rho;
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<Mode> modes = enumerate_modes(b, e_guess);
        if (modes.size() >= count) {
            modes.resize(count);
            return modes;
        }
        e_guess *= 1.5;
    }
    throw std::runtime_error("lowest_modes: enumeration failed to reach requested count");
}

}  // namespace billiard
