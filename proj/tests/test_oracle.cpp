#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "test_helpers.hpp"

using namespace billiard;
using testing_fixtures::midpoint_quad1d;
using testing_fixtures::ref_box;
using testing_fixtures::ref_impurity;

namespace {

// Quadrature evaluation of the potential element, independent of the closed
// forms used by the library.
double quadrature_element(const RectangleBilliard& b, const RectImpurity& imp, Mode a,
                          Mode c) {
    const double pi = std::numbers::pi;
    const double ix = midpoint_quad1d(
        imp.center.x - 0.5 * imp.dlx, imp.center.x + 0.5 * imp.dlx, 8192,
        [&](double x) { return std::sin(a.m * pi * x / b.lx) * std::sin(c.m * pi * x / b.lx); });
    const double iy = midpoint_quad1d(
        imp.center.y - 0.5 * imp.dly, imp.center.y + 0.5 * imp.dly, 8192,
        [&](double y) { return std::sin(a.n * pi * y / b.ly) * std::sin(c.n * pi * y / b.ly); });
    return imp.u1 * 4.0 / b.area() * ix * iy;
}

OracleConfig values_only(double factor) {
    OracleConfig cfg;
    cfg.basis_factor = factor;
    cfg.want_vectors = false;
    return cfg;
}

}  // namespace

TEST_CASE("closed-form potential elements match quadrature on random mode pairs") {
    const RectangleBilliard b = ref_box();
    const RectImpurity imp = ref_impurity(7.5);
    std::mt19937 rng(12345);
    std::uniform_int_distribution<int> pick(1, 30);
    for (int k = 0; k < 20; ++k) {
        const Mode a{pick(rng), pick(rng)};
        const Mode c{pick(rng), pick(rng)};
        const double closed = potential_element(b, imp, a, c);
        const double quad = quadrature_element(b, imp, a, c);
        CHECK(std::abs(closed - quad) < 1e-8 * std::max(1.0, std::abs(closed)));
    }
}

TEST_CASE("an impurity covering the whole box reduces to a constant shift") {
    const RectangleBilliard b = ref_box();
    RectImpurity full;
    full.center = {0.5 * b.lx, 0.5 * b.ly};
    full.dlx = b.lx;
    full.dly = b.ly;
    full.u1 = -4.25;
    CHECK(potential_element(b, full, {1, 1}, {1, 1}) ==
          Catch::Approx(full.u1).epsilon(1e-12));
    CHECK(potential_element(b, full, {4, 7}, {4, 7}) ==
          Catch::Approx(full.u1).epsilon(1e-12));
    CHECK(std::abs(potential_element(b, full, {1, 1}, {2, 1})) < 1e-12);
    CHECK(std::abs(potential_element(b, full, {3, 5}, {3, 2})) < 1e-12);
}

TEST_CASE("small impurities act pointlike on long-wavelength modes") {
    const RectangleBilliard b = ref_box();
    const RectImpurity imp = ref_impurity(100.0);
    const Point c = imp.center;
    const Mode probes[] = {{1, 1}, {1, 2}, {2, 2}};
    for (const Mode a : probes)
        for (const Mode d : probes) {
            const double pointlike = imp.u1 * imp.area()
                                     * eigenfunction_value(b, a, c.x, c.y)
                                     * eigenfunction_value(b, d, c.x, c.y);
            CHECK(potential_element(b, imp, a, d) ==
                  Catch::Approx(pointlike).epsilon(0.05));
        }
}

TEST_CASE("assembled matrices are symmetric with unperturbed diagonal energies") {
    const RectangleBilliard b = ref_box();
    const RectImpurity imp = ref_impurity(-37.0);
    const std::vector<Mode> basis = lowest_modes(b, 40);
    const std::vector<double> h = assemble_hamiltonian(b, imp, basis);
    const std::size_t n = basis.size();
    std::mt19937 rng(99);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int k = 0; k < 30; ++k) {
        const std::size_t i = pick(rng), j = pick(rng);
        CHECK(h[i * n + j] == h[j * n + i]);
        const double expect = potential_element(b, imp, basis[i], basis[j])
                              + (i == j ? mode_energy(b, basis[i]) : 0.0);
        CHECK(h[i * n + j] == Catch::Approx(expect).margin(1e-15));
    }

    RectImpurity off = imp;
    off.u1 = 0.0;
    const std::vector<double> h0 = assemble_hamiltonian(b, off, basis);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j)
                CHECK(h0[i * n + j] == mode_energy(b, basis[i]));
            else
                CHECK(h0[i * n + j] == 0.0);
        }
}

TEST_CASE("the trace equals the independent sum of diagonal contributions") {
    const RectangleBilliard b = ref_box();
    const RectImpurity imp = ref_impurity(52.0);
    const std::vector<Mode> basis = lowest_modes(b, 60);
    const std::vector<double> h = assemble_hamiltonian(b, imp, basis);
    double trace = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i)
        trace += h[i * basis.size() + i];
    double expect = 0.0;
    for (const Mode mo : basis)
        expect += mode_energy(b, mo) + quadrature_element(b, imp, mo, mo);
    CHECK(trace == Catch::Approx(expect).epsilon(1e-9));
}

TEST_CASE("dense storage beyond the memory budget is rejected") {
    const RectangleBilliard b = ref_box();
    const RectImpurity imp = ref_impurity(1.0);
    OracleConfig cfg;
    cfg.max_matrix_bytes = 1000.0;
    CHECK_THROWS_WITH(assemble_hamiltonian(b, imp, lowest_modes(b, 100), cfg),
                      Catch::Matchers::ContainsSubstring("memory budget"));
}

TEST_CASE("diagonalizing the unperturbed matrix returns the mode energies in order") {
    const RectangleBilliard b = ref_box();
    RectImpurity imp = ref_impurity(0.0);
    const std::vector<Mode> basis = lowest_modes(b, 50);
    const OracleResult res =
        eigendecompose(assemble_hamiltonian(b, imp, basis), basis, OracleConfig{});
    REQUIRE(res.eigenvalues.size() == 50);
    for (std::size_t k = 0; k < 50; ++k) {
        CHECK(res.eigenvalues[k] == Catch::Approx(mode_energy(b, basis[k])).epsilon(1e-13));
        const auto weights = mode_overlaps(res, k);
        CHECK(weights[0].first == basis[k]);
        CHECK(weights[0].second == Catch::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("a two-mode matrix reproduces the closed-form eigenvalues") {
    const RectangleBilliard b = ref_box();
    const RectImpurity imp = ref_impurity(250.0);
    const std::vector<Mode> basis = {{1, 1}, {2, 1}};
    const std::vector<double> h = assemble_hamiltonian(b, imp, basis);
    const double a = h[0], c = h[1], d = h[3];
    const double mid = 0.5 * (a + d);
    const double rad = std::sqrt(0.25 * (a - d) * (a - d) + c * c);

    const OracleResult res = eigendecompose(h, basis, OracleConfig{});
    CHECK(res.eigenvalues[0] == Catch::Approx(mid - rad).epsilon(1e-13));
    CHECK(res.eigenvalues[1] == Catch::Approx(mid + rad).epsilon(1e-13));
    // Orthonormal vectors.
    const double dot = res.vectors[0] * res.vectors[2] + res.vectors[1] * res.vectors[3];
    const double n0 = res.vectors[0] * res.vectors[0] + res.vectors[1] * res.vectors[1];
    CHECK(std::abs(dot) < 1e-13);
    CHECK(n0 == Catch::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("every sorted eigenvalue is monotone in the potential height") {
    const RectangleBilliard b = ref_box();
    std::vector<std::vector<double>> spectra;
    for (const double u1 : {-225.0, 0.0, 225.0}) {
        RectImpurity imp = ref_impurity(u1);
        spectra.push_back(oracle_spectrum(b, imp, values_only(3.0)).eigenvalues);
    }
    REQUIRE(spectra[0].size() == spectra[1].size());
    for (std::size_t k = 0; k < std::min<std::size_t>(80, spectra[0].size()); ++k) {
        CHECK(spectra[0][k] <= spectra[1][k]);
        CHECK(spectra[1][k] <= spectra[2][k]);
    }
}

TEST_CASE("doubling the basis barely moves the low spectrum of the stiff impurity") {
    const RectangleBilliard b = ref_box();
    const RectImpurity imp = ref_impurity(9000.0);
    const std::vector<double> w10 = oracle_spectrum(b, imp, values_only(10.0)).eigenvalues;
    const std::vector<double> w20 = oracle_spectrum(b, imp, values_only(20.0)).eigenvalues;
    for (std::size_t k = 0; k < 5; ++k)
        CHECK(std::abs(w10[k] - w20[k]) < 0.05);

    // Frozen from an independent dense diagonalization of the same matrix.
    const double frozen[5] = {1.9463379483142147, 3.7981820610563366, 4.9536397966747687,
                              6.6181675589395557, 7.6143366275330262};
    for (std::size_t k = 0; k < 5; ++k)
        CHECK(w10[k] == Catch::Approx(frozen[k]).margin(1e-6));
}

TEST_CASE("the weak-attraction window state carries the frozen mode weights") {
    const RectangleBilliard b = ref_box();
    const RectImpurity imp = ref_impurity(-225.0);
    OracleConfig cfg;  // default factor 10, vectors on, residual checked
    const OracleResult res = oracle_spectrum(b, imp, cfg);
    REQUIRE(res.basis.size() == 1391);

    std::size_t k = 0;
    double best = 1e300;
    for (std::size_t i = 0; i < res.eigenvalues.size(); ++i)
        if (std::abs(res.eigenvalues[i] - 5.64) < best) {
            best = std::abs(res.eigenvalues[i] - 5.64);
            k = i;
        }
    CHECK(res.eigenvalues[k] == Catch::Approx(5.6406699300998939).margin(1e-6));

    const auto weights = mode_overlaps(res, k);
    CHECK(weights[0].first == Mode{2, 2});
    CHECK(weights[0].second == Catch::Approx(0.50170906299268758).margin(1e-4));
    CHECK(weights[1].first == Mode{1, 2});
    CHECK(weights[1].second == Catch::Approx(0.30003293861713148).margin(1e-4));

    double total = 0.0;
    for (const auto& [mo, wgt] : weights)
        total += wgt;
    CHECK(total == Catch::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("rasters reproduce single modes exactly at cell centers") {
    const RectangleBilliard b = ref_box();
    const std::vector<Mode> modes = {{2, 3}};
    const std::vector<double> coeff = {1.0};
    const Raster r = wavefunction_grid(b, modes, coeff, 32, 24);
    REQUIRE(r.amplitude.size() == 32 * 24);
    for (std::size_t j = 0; j < r.ny; ++j)
        for (std::size_t i = 0; i < r.nx; ++i) {
            const double x = (static_cast<double>(i) + 0.5) * b.lx / 32.0;
            const double y = (static_cast<double>(j) + 0.5) * b.ly / 24.0;
            const double expect = eigenfunction_value(b, {2, 3}, x, y);
            CHECK(r.amplitude[j * r.nx + i] == Catch::Approx(expect).margin(1e-13));
            CHECK(r.density[j * r.nx + i] ==
                  Catch::Approx(expect * expect).margin(1e-13));
        }
}

TEST_CASE("raster densities integrate to one for normalized states") {
    const RectangleBilliard b = ref_box();
    // A spread-out normalized superposition of the lowest 40 modes.
    const std::vector<Mode> modes = lowest_modes(b, 40);
    std::vector<double> coeff(modes.size());
    double norm2 = 0.0;
    for (std::size_t i = 0; i < coeff.size(); ++i) {
        coeff[i] = 1.0 / std::sqrt(static_cast<double>(i + 1));
        norm2 += coeff[i] * coeff[i];
    }
    for (double& c : coeff)
        c /= std::sqrt(norm2);

    const Raster r = wavefunction_grid(b, modes, coeff, 256, 256);
    double riemann = 0.0;
    for (const double d : r.density)
        riemann += d;
    riemann *= (b.lx / 256.0) * (b.ly / 256.0);
    CHECK(riemann == Catch::Approx(1.0).margin(0.02));
}

TEST_CASE("rasters and assembly are unchanged by the worker thread count") {
    const RectangleBilliard b = ref_box();
    const RectImpurity imp = ref_impurity(-225.0);
    const std::vector<Mode> basis = lowest_modes(b, 120);
    OracleConfig one, four;
    four.threads = 4;
    const std::vector<double> h1 = assemble_hamiltonian(b, imp, basis, one);
    const std::vector<double> h4 = assemble_hamiltonian(b, imp, basis, four);
    CHECK(h1 == h4);

    std::vector<double> coeff(basis.size(), 0.0);
    coeff[3] = 0.8;
    coeff[7] = -0.6;
    const Raster r1 = wavefunction_grid(b, basis, coeff, 64, 64, 1);
    const Raster r4 = wavefunction_grid(b, basis, coeff, 64, 64, 4);
    CHECK(r1.amplitude == r4.amplitude);
}

TEST_CASE("raster and overlap preconditions are enforced") {
    const RectangleBilliard b = ref_box();
    const std::vector<Mode> modes = lowest_modes(b, 5);
    const std::vector<double> coeff(4, 0.5);
    CHECK_THROWS_AS(wavefunction_grid(b, modes, coeff, 32, 32), std::invalid_argument);
    CHECK_THROWS_AS(wavefunction_grid(b, modes, std::vector<double>(5, 0.4), 1, 32),
                    std::invalid_argument);

    RectImpurity imp = ref_impurity(1.0);
    OracleConfig cfg;
    cfg.want_vectors = false;
    const OracleResult res = oracle_spectrum(b, imp, cfg);
    CHECK_THROWS_WITH(mode_overlaps(res, 0),
                      Catch::Matchers::ContainsSubstring("eigenvectors"));
}
