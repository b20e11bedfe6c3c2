#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "test_helpers.hpp"

using namespace billiard;
using testing_fixtures::ref_box;
using testing_fixtures::ref_impurity;

namespace {

// Impurity with an exact bare strength v1, keeping the reference extent.
RectImpurity impurity_with_v1(double v1) {
    RectImpurity imp = ref_impurity(0.0);
    imp.u1 = v1 / imp.area();
    return imp;
}

}  // namespace

TEST_CASE("bare strength is height times area") {
    RectImpurity imp = ref_impurity(9000.0);
    CHECK(v1_from_potential(imp) == Catch::Approx(10.0).epsilon(1e-4));
    CHECK(v1_from_potential(imp) == imp.u1 * imp.dlx * imp.dly);
    imp.u1 = 0.0;
    CHECK(v1_from_potential(imp) == 0.0);
}

TEST_CASE("the size cutoff retains the frozen mode count for the reference impurity") {
    const RectangleBilliard b = ref_box();
    const RectImpurity imp = ref_impurity(-225.0);
    CHECK(cutoff_energy(b, imp) == Catch::Approx(143.2399).margin(1e-3));
    CHECK(cutoff_index(b, imp) == 130);
    // Same count as a direct enumeration at the cutoff.
    CHECK(cutoff_index(b, imp) == enumerate_modes(b, cutoff_energy(b, imp)).size());
}

TEST_CASE("growing the impurity never adds retained modes") {
    const RectangleBilliard b = ref_box();
    const RectImpurity imp = ref_impurity(1.0);
    RectImpurity doubled = imp;
    doubled.dlx *= 2.0;
    CHECK(cutoff_index(b, doubled) < cutoff_index(b, imp));
    CHECK(cutoff_energy(b, doubled) == Catch::Approx(0.5 * cutoff_energy(b, imp)).epsilon(1e-12));
}

TEST_CASE("an impurity comparable to the box is rejected by the cutoff") {
    const RectangleBilliard b = ref_box();
    RectImpurity big;
    big.center = {0.5 * b.lx, 0.5 * b.ly};
    big.dlx = 0.9 * b.lx;
    big.dly = 0.9 * b.ly;
    big.u1 = 1.0;
    CHECK(!big.small_against(b));
    CHECK_THROWS_WITH(cutoff_index(b, big),
                      Catch::Matchers::ContainsSubstring("fewer than two modes"));
}

TEST_CASE("geometry validation names the offending impurity field") {
    const RectangleBilliard b = ref_box();
    RectImpurity imp = ref_impurity(1.0);
    imp.dlx = -1.0;
    CHECK_THROWS_WITH(imp.validate(b), Catch::Matchers::ContainsSubstring("dlx"));
    imp = ref_impurity(1.0);
    imp.center.x = 0.01;  // extent spills over the left edge
    CHECK_THROWS_WITH(imp.validate(b), Catch::Matchers::ContainsSubstring("extent"));
    imp = ref_impurity(std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_WITH(imp.validate(b), Catch::Matchers::ContainsSubstring("u1"));
}

TEST_CASE("truncated roots on the frozen interval match the independent reference") {
    const RectangleBilliard b = ref_box();
    const SeriesConfig cfg;
    const double e12 = 4.1613390972801758;
    const double e22 = 6.3099308290207627;
    const EnergyWindow window{e12 + 1e-9, e22 - 1e-9};

    const struct {
        double v1;
        double root;
    } cases[] = {
        {10.0, 5.0495429392481315},
        {-3.33, 5.1170861295538304},
        {-0.25, 5.8234628121112175},
    };
    for (const auto& c : cases) {
        const SpectrumResult res = truncated_secular_solve(b, impurity_with_v1(c.v1),
                                                           window, cfg);
        REQUIRE(res.lines.size() == 1);
        CHECK(res.lines[0].omega == Catch::Approx(c.root).margin(1e-9));
        CHECK(res.lines[0].residual < 1e-7);
    }
}

TEST_CASE("truncated spectrum interlaces with one root per simple interval") {
    const RectangleBilliard b = ref_box();
    const RectImpurity imp = impurity_with_v1(-0.25);
    const SeriesConfig cfg;
    const SpectrumResult res = truncated_secular_solve(b, imp, {1.6, 25.0}, cfg);
    REQUIRE(res.lines.size() >= 8);
    for (std::size_t i = 0; i < res.lines.size(); ++i) {
        CHECK(res.lines[i].omega > res.lines[i].bracket_lo);
        CHECK(res.lines[i].omega < res.lines[i].bracket_hi);
        if (i > 0)
            CHECK(res.lines[i].bracket_lo >= res.lines[i - 1].bracket_hi - 1e-12);
    }
    CHECK(res.expansion_modes.size() == 130);
    // Validity ends at half the energy of the last retained mode.
    const double e_last = mode_energy(b, res.expansion_modes.back());
    CHECK(res.validity_limit == Catch::Approx(0.5 * e_last).epsilon(1e-14));

    // Frozen reference roots of the two intervals below the figure window.
    CHECK(res.lines[0].omega == Catch::Approx(2.5247293242396784).margin(1e-9));
    CHECK(res.lines[1].omega == Catch::Approx(3.8126020809748979).margin(1e-9));
}

TEST_CASE("vanishing inverse bare strength pins roots to the unperturbed levels") {
    const RectangleBilliard b = ref_box();
    for (const double u1 : {1e-9, -1e-9}) {
        RectImpurity imp = ref_impurity(u1);
        const SpectrumResult res = truncated_secular_solve(b, imp, {1.6, 12.0}, SeriesConfig{});
        REQUIRE(!res.lines.empty());
        for (const SpectralLine& line : res.lines) {
            const double near = (u1 > 0.0) ? line.omega - line.bracket_lo
                                           : line.bracket_hi - line.omega;
            CHECK(near < 1e-5);
        }
    }
}

TEST_CASE("every sorted attractive level sits at or below its repulsive partner") {
    const RectangleBilliard b = ref_box();
    const SeriesConfig cfg;
    const EnergyWindow window{-20.0, 12.0};
    const SpectrumResult attr =
        truncated_secular_solve(b, impurity_with_v1(-0.25), window, cfg);
    const SpectrumResult rep =
        truncated_secular_solve(b, impurity_with_v1(0.25), window, cfg);
    REQUIRE(attr.lines.size() >= 4);
    REQUIRE(rep.lines.size() >= 4);
    const std::size_t k = std::min(attr.lines.size(), rep.lines.size());
    for (std::size_t i = 0; i < k; ++i)
        CHECK(attr.lines[i].omega < rep.lines[i].omega);
    // The attractive model binds below the ground level, the repulsive does not.
    CHECK(attr.lines[0].omega < mode_energy(b, {1, 1}));
    CHECK(rep.lines[0].omega > mode_energy(b, {1, 1}));
}

TEST_CASE("roots are stable against a twenty percent cutoff variation") {
    const RectangleBilliard b = ref_box();
    const double v1 = -0.25;
    const EnergyWindow window{1.6, 8.0};
    const SeriesConfig cfg;

    const SpectrumResult base = truncated_secular_solve(b, impurity_with_v1(v1), window, cfg);
    for (const double scale : {1.2, 1.0 / 1.2}) {
        // Same bare strength, extent scaled so the cutoff moves by the factor.
        RectImpurity imp = ref_impurity(0.0);
        imp.dlx *= std::sqrt(scale);
        imp.dly *= std::sqrt(scale);
        imp.u1 = v1 / imp.area();
        const SpectrumResult varied = truncated_secular_solve(b, imp, window, cfg);
        REQUIRE(varied.lines.size() == base.lines.size());
        for (std::size_t i = 0; i < base.lines.size(); ++i)
            CHECK(std::abs(varied.lines[i].omega - base.lines[i].omega) < 0.1);
    }
}

TEST_CASE("zero height is rejected as the unperturbed billiard") {
    const RectangleBilliard b = ref_box();
    CHECK_THROWS_AS(truncated_secular_solve(b, ref_impurity(0.0), {1.0, 10.0}, SeriesConfig{}),
                    std::domain_error);
    CHECK_THROWS_AS(
        vbar_inverse_from_v(b, ref_impurity(0.0), 5.0, 1.0, SeriesConfig{}),
        std::domain_error);
}

TEST_CASE("the exact coupling map reproduces truncated roots in the renormalized model") {
    const RectangleBilliard b = ref_box();
    const RectImpurity imp = impurity_with_v1(-0.25);
    SeriesConfig cfg;
    cfg.n_max = 20000;
    const double omega_star = 5.8234628121112175;

    const double vbar_inv = vbar_inverse_from_v(b, imp, omega_star, 1.0, cfg);
    // Wiring check: the regularized series hits the mapped coupling exactly at
    // the truncated root.
    CHECK(regularized_g(b, imp.center, omega_star, 1.0, cfg) ==
          Catch::Approx(vbar_inv).margin(1e-8));

    // Full-pipeline check: the renormalized solver reproduces the root.
    PointScatterer sc;
    sc.position = imp.center;
    sc.vbar = 1.0 / vbar_inv;
    const SpectrumResult res =
        solve_point_spectrum(b, sc, {omega_star - 0.5, omega_star + 0.5}, cfg);
    REQUIRE(res.lines.size() == 1);
    CHECK(res.lines[0].omega == Catch::Approx(omega_star).margin(1e-8));
}

TEST_CASE("the smooth coupling map tracks the exact one within a quarter width") {
    const RectangleBilliard b = ref_box();
    const RectImpurity imp = impurity_with_v1(-0.25);
    SeriesConfig cfg;
    cfg.n_max = 20000;
    const double quarter_width = 0.125 * std::numbers::pi * b.mass;  // (pi M / 2) / 4
    for (const double omega : {4.5, 5.63, 6.8}) {
        const double exact = vbar_inverse_from_v(b, imp, omega, 1.0, cfg);
        const double smooth = vbar_inverse_from_v_smooth(b, imp, omega, 1.0);
        CHECK(std::abs(exact - smooth) < quarter_width);
    }
}

TEST_CASE("the exact coupling map grows logarithmically in the distance to the cutoff") {
    const RectangleBilliard b = ref_box();
    const RectImpurity imp = impurity_with_v1(-0.25);
    SeriesConfig cfg;
    cfg.n_max = 20000;
    const double e_cut = cutoff_energy(b, imp);
    const double lo = 4.0, hi = 7.0;
    const double slope = (vbar_inverse_from_v(b, imp, lo, 1.0, cfg)
                          - vbar_inverse_from_v(b, imp, hi, 1.0, cfg))
                         / (std::log((e_cut - lo) / (e_cut - hi))
                            * b.mass / (2.0 * std::numbers::pi));
    CHECK(slope == Catch::Approx(1.0).margin(0.15));
}
