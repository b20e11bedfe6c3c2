#pragma once

/*
 * Reference solver for the rectangular impurity: assemble the full Hamiltonian
 * H_ab = E_a delta_ab + u1 (4/S) Ix(ma, mb) Iy(na, nb) over a basis of box
 * modes and diagonalize it directly.  The 1D overlap integrals over the
 * impurity extent have closed forms, so assembly is exact up to rounding.
 *
 * Diagonalization uses the LAPACK divide-and-conquer symmetric driver; when
 * eigenvectors are requested every state is verified against the residual
 * bound ||H v - w v|| <= residual_tol * ||H||_F.
 */

#include <functional>
#include <thread>

#include "finite_impurity.hpp"

extern "C" {
void dsyevd_(const char* jobz, const char* uplo, const int* n, double* a, const int* lda,
             double* w, double* work, const int* lwork, int* iwork, const int* liwork,
             int* info);
void dgemm_(const char* transa, const char* transb, const int* m, const int* n, const int* k,
            const double* alpha, const double* a, const int* lda, const double* b,
            const int* ldb, const double* beta, double* c, const int* ldc);
}

namespace billiard {

struct OracleConfig {
    double basis_factor = 10.0;        // keep modes with E <= basis_factor * cutoff_energy
    bool want_vectors = true;
    double residual_tol = 1e-8;        // 0 disables the post-hoc residual check
    double max_matrix_bytes = 4.0e9;   // memory budget for dense storage + workspace
    int threads = 1;                   // worker threads for matrix assembly
};

struct OracleResult {
    std::vector<Mode> basis;
    std::vector<double> eigenvalues;  // ascending
    std::vector<double> vectors;      // state-major: state k at [k*n, (k+1)*n)
    double h_norm = 0.0;              // Frobenius norm of H
};

namespace detail {

// Integral of sin(a pi t / l) sin(b pi t / l) over [lo, hi].
[[nodiscard]] inline double sine_product_integral(int a, int b, double lo, double hi,
                                                  double l) {
    const double pi = std::numbers::pi;
    if (a == b) {
        const auto f = [&](double t) {
            return 0.5 * t - std::sin(2.0 * a * pi * t / l) * l / (4.0 * a * pi);
        };
        return f(hi) - f(lo);
    }
    const auto f = [&](double t) {
        return std::sin((a - b) * pi * t / l) * l / (2.0 * (a - b) * pi)
             - std::sin((a + b) * pi * t / l) * l / (2.0 * (a + b) * pi);
    };
    return f(hi) - f(lo);
}

inline void run_rows(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& body) {
    if (threads <= 1) {
        body(0, n);
        return;
    }
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t lo = n * t / nt;
        const std::size_t hi = n * (t + 1) / nt;
        pool.emplace_back(body, lo, hi);
    }
    for (auto& th : pool)
        th.join();
}

}  // namespace detail

// Single matrix element of the step potential between two box modes.
[[nodiscard]] inline double potential_element(const RectangleBilliard& b,
                                              const RectImpurity& imp, Mode a, Mode c) {
    imp.validate(b);
    validate_mode(a);
    validate_mode(c);
    const double ix = detail::sine_product_integral(a.m, c.m, imp.center.x - 0.5 * imp.dlx,
                                                    imp.center.x + 0.5 * imp.dlx, b.lx);
    const double iy = detail::sine_product_integral(a.n, c.n, imp.center.y - 0.5 * imp.dly,
                                                    imp.center.y + 0.5 * imp.dly, b.ly);
    return imp.u1 * 4.0 / b.area() * ix * iy;
}

// Dense symmetric H over the given basis, flat row-major (n x n).
[[nodiscard]] inline std::vector<double> assemble_hamiltonian(const RectangleBilliard& b,
                                                              const RectImpurity& imp,
                                                              const std::vector<Mode>& basis,
                                                              const OracleConfig& cfg = {}) {
    imp.validate(b);
    const std::size_t n = basis.size();
    if (n == 0)
        throw std::invalid_argument("oracle basis: must not be empty");
    const double dense_copies = cfg.want_vectors ? 3.0 : 1.1;
    if (static_cast<double>(n) * static_cast<double>(n) * 8.0 * dense_copies
        > cfg.max_matrix_bytes)
        throw std::invalid_argument("oracle basis: dense storage exceeds the memory budget");

    int m_top = 0, n_top = 0;
    for (const Mode mo : basis) {
        validate_mode(mo);
        m_top = std::max(m_top, mo.m);
        n_top = std::max(n_top, mo.n);
    }
    // Closed-form 1D integral tables over the index ranges actually present.
    const double x_lo = imp.center.x - 0.5 * imp.dlx, x_hi = imp.center.x + 0.5 * imp.dlx;
    const double y_lo = imp.center.y - 0.5 * imp.dly, y_hi = imp.center.y + 0.5 * imp.dly;
    std::vector<double> ix(static_cast<std::size_t>(m_top) * m_top);
    std::vector<double> iy(static_cast<std::size_t>(n_top) * n_top);
    for (int p = 1; p <= m_top; ++p)
        for (int q = p; q <= m_top; ++q) {
            const double v = detail::sine_product_integral(p, q, x_lo, x_hi, b.lx);
            ix[static_cast<std::size_t>(p - 1) * m_top + (q - 1)] = v;
            ix[static_cast<std::size_t>(q - 1) * m_top + (p - 1)] = v;
        }
    for (int p = 1; p <= n_top; ++p)
        for (int q = p; q <= n_top; ++q) {
            const double v = detail::sine_product_integral(p, q, y_lo, y_hi, b.ly);
            iy[static_cast<std::size_t>(p - 1) * n_top + (q - 1)] = v;
            iy[static_cast<std::size_t>(q - 1) * n_top + (p - 1)] = v;
        }

    std::vector<double> h(n * n);
    const double pref = imp.u1 * 4.0 / b.area();
    detail::run_rows(n, cfg.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const Mode mi = basis[i];
            for (std::size_t j = 0; j <= i; ++j) {
                const Mode mj = basis[j];
                const double v = pref
                    * ix[static_cast<std::size_t>(mi.m - 1) * m_top + (mj.m - 1)]
                    * iy[static_cast<std::size_t>(mi.n - 1) * n_top + (mj.n - 1)];
                h[i * n + j] = v;
                h[j * n + i] = v;
            }
            h[i * n + i] += mode_energy(b, mi);
        }
    });
    return h;
}

// Eigendecomposition of a flat symmetric matrix.  Throws if the LAPACK driver
// fails to converge or (with vectors) any state violates the residual bound.
[[nodiscard]] inline OracleResult eigendecompose(std::vector<double> h, std::vector<Mode> basis,
                                                 const OracleConfig& cfg = {}) {
    const std::size_t n = basis.size();
    if (n == 0 || h.size() != n * n)
        throw std::invalid_argument("oracle matrix: size must match basis");
    if (n > static_cast<std::size_t>(std::numeric_limits<int>::max()))
        throw std::invalid_argument("oracle basis: too large for the LAPACK interface");

    OracleResult out;
    out.basis = std::move(basis);
    out.eigenvalues.assign(n, 0.0);
    double norm2 = 0.0;
    for (const double v : h)
        norm2 += v * v;
    out.h_norm = std::sqrt(norm2);

    std::vector<double> h_copy;
    if (cfg.want_vectors && cfg.residual_tol > 0.0)
        h_copy = h;

    const int ni = static_cast<int>(n);
    const char jobz = cfg.want_vectors ? 'V' : 'N';
    const char uplo = 'L';
    int info = 0;
    int lwork = -1, liwork = -1;
    double work_query = 0.0;
    int iwork_query = 0;
    dsyevd_(&jobz, &uplo, &ni, h.data(), &ni, out.eigenvalues.data(), &work_query, &lwork,
            &iwork_query, &liwork, &info);
    if (info != 0)
        throw std::runtime_error("eigendecomposition: workspace query failed");
    lwork = static_cast<int>(work_query);
    liwork = iwork_query;
    std::vector<double> work(static_cast<std::size_t>(lwork));
    std::vector<int> iwork(static_cast<std::size_t>(liwork));
    dsyevd_(&jobz, &uplo, &ni, h.data(), &ni, out.eigenvalues.data(), work.data(), &lwork,
            iwork.data(), &liwork, &info);
    if (info != 0)
        throw std::runtime_error("eigendecomposition: LAPACK driver did not converge (info="
                                 + std::to_string(info) + ")");

    if (cfg.want_vectors) {
        // Column j of the (column-major) output is eigenvector j, so the flat
        // buffer is already state-major.
        out.vectors = std::move(h);
        if (cfg.residual_tol > 0.0) {
            std::vector<double> hv(n * n);
            const double one = 1.0, zero = 0.0;
            const char nt = 'N';
            dgemm_(&nt, &nt, &ni, &ni, &ni, &one, h_copy.data(), &ni, out.vectors.data(), &ni,
                   &zero, hv.data(), &ni);
            for (std::size_t k = 0; k < n; ++k) {
                double r2 = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double r = hv[k * n + i] - out.eigenvalues[k] * out.vectors[k * n + i];
                    r2 += r * r;
                }
                if (std::sqrt(r2) > cfg.residual_tol * out.h_norm)
                    throw std::runtime_error("eigendecomposition: state residual exceeds bound");
            }
        }
    }
    return out;
}

// Basis selection, assembly and diagonalization for the impurity in one step.
[[nodiscard]] inline OracleResult oracle_spectrum(const RectangleBilliard& b,
                                                  const RectImpurity& imp,
                                                  const OracleConfig& cfg = {}) {
    imp.validate(b);
    if (!(cfg.basis_factor >= 1.0) || !std::isfinite(cfg.basis_factor))
        throw std::invalid_argument("solver.oracle_basis_factor: must be >= 1");
    const double e_basis = cfg.basis_factor * cutoff_energy(b, imp);
    std::vector<Mode> basis = enumerate_modes(b, e_basis);
    if (basis.size() < 2)
        throw std::invalid_argument("oracle basis: fewer than two modes below the basis cutoff");
    std::vector<double> h = assemble_hamiltonian(b, imp, basis, cfg);
    return eigendecompose(std::move(h), std::move(basis), cfg);
}

// Unperturbed-mode weights |<phi_i|psi_k>|^2 of state k, sorted descending.
[[nodiscard]] inline std::vector<std::pair<Mode, double>>
mode_overlaps(const OracleResult& res, std::size_t state) {
    const std::size_t n = res.basis.size();
    if (res.vectors.size() != n * n)
        throw std::invalid_argument("oracle result: eigenvectors were not requested");
    if (state >= n)
        throw std::invalid_argument("oracle state: index out of range");
    std::vector<std::pair<Mode, double>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = res.vectors[state * n + i];
        out[i] = {res.basis[i], v * v};
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& c) { return a.second > c.second; });
    return out;
}

struct Raster {
    std::size_t nx = 0, ny = 0;
    double lx = 0.0, ly = 0.0;
    std::vector<double> amplitude;  // row-major, row j = y cell j, cell centers
    std::vector<double> density;
};

// Rasterize psi = sum_k c_k phi_{basis[k]} on an nx x ny grid of cell centers.
// Separability of the modes keeps this O(K ny + Um nx ny).
[[nodiscard]] inline Raster wavefunction_grid(const RectangleBilliard& b,
                                              const std::vector<Mode>& modes,
                                              const std::vector<double>& coefficients,
                                              std::size_t nx, std::size_t ny,
                                              int threads = 1) {
    b.validate();
    if (modes.size() != coefficients.size())
        throw std::invalid_argument("wavefunction: modes and coefficients must align");
    if (nx < 2 || ny < 2)
        throw std::invalid_argument("output.grid: needs at least 2 cells per axis");

    int m_top = 0, n_top = 0;
    for (const Mode mo : modes) {
        validate_mode(mo);
        m_top = std::max(m_top, mo.m);
        n_top = std::max(n_top, mo.n);
    }
    Raster r;
    r.nx = nx;
    r.ny = ny;
    r.lx = b.lx;
    r.ly = b.ly;
    r.amplitude.assign(nx * ny, 0.0);
    r.density.assign(nx * ny, 0.0);
    if (modes.empty())
        return r;

    const double pi = std::numbers::pi;
    const double ax = std::sqrt(2.0 / b.lx), ay = std::sqrt(2.0 / b.ly);
    // sin tables at cell centers for every index that occurs.
    std::vector<double> sx(static_cast<std::size_t>(m_top) * nx);
    for (int m = 1; m <= m_top; ++m)
        for (std::size_t i = 0; i < nx; ++i) {
            const double x = (static_cast<double>(i) + 0.5) * b.lx / static_cast<double>(nx);
            sx[static_cast<std::size_t>(m - 1) * nx + i] = ax * std::sin(m * pi * x / b.lx);
        }
    std::vector<double> sy(static_cast<std::size_t>(n_top) * ny);
    for (int n = 1; n <= n_top; ++n)
        for (std::size_t j = 0; j < ny; ++j) {
            const double y = (static_cast<double>(j) + 0.5) * b.ly / static_cast<double>(ny);
            sy[static_cast<std::size_t>(n - 1) * ny + j] = ay * std::sin(n * pi * y / b.ly);
        }

    // Partial profiles P_m(y) = sum_{k: m_k = m} c_k Y_{n_k}(y).
    std::vector<double> pm(static_cast<std::size_t>(m_top) * ny, 0.0);
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const double c = coefficients[k];
        if (c == 0.0)
            continue;
        double* row = pm.data() + static_cast<std::size_t>(modes[k].m - 1) * ny;
        const double* yrow = sy.data() + static_cast<std::size_t>(modes[k].n - 1) * ny;
        for (std::size_t j = 0; j < ny; ++j)
            row[j] += c * yrow[j];
    }

    detail::run_rows(ny, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t j = lo; j < hi; ++j) {
            double* out_row = r.amplitude.data() + j * nx;
            for (int m = 1; m <= m_top; ++m) {
                const double p = pm[static_cast<std::size_t>(m - 1) * ny + j];
                if (p == 0.0)
                    continue;
                const double* xrow = sx.data() + static_cast<std::size_t>(m - 1) * nx;
                for (std::size_t i = 0; i < nx; ++i)
                    out_row[i] += p * xrow[i];
            }
        }
    });
    for (std::size_t idx = 0; idx < r.amplitude.size(); ++idx)
        r.density[idx] = r.amplitude[idx] * r.amplitude[idx];
    return r;
}

}  // namespace billiard
