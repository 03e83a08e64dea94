#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "coalesce/detcore.hpp"
#include "coalesce/gaps.hpp"
#include "support/oracles.hpp"

using namespace coalesce;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrtPi = 1.7724538509055160273;
} // namespace

TEST_CASE("autocorrelation: brute-force double sum oracle and positivity") {
    Kernel k = Kernel::ct_simple_walk(0.25);
    auto pmf = oracles::ct_walk_pmf(0.25, 60);
    auto p = [&](long n) { return pmf[static_cast<std::size_t>(n + 60)]; };
    for (long m : {0L, 1L, 4L}) {
        double brute = 0.0;
        for (long s = -55; s <= 55; ++s) brute += p(s) * p(s + m);
        CHECK(std::abs(autocorrelation(k, m) - brute) < 1e-12);
    }
    CHECK(autocorrelation(k, 0) > 0.0);
    CHECK(autocorrelation(k, 3) == autocorrelation(k, -3));
    CHECK_THROWS_AS(autocorrelation(Kernel::gaussian(1.0), 1), DomainError);
}

TEST_CASE("autocorrelation equals the doubled-horizon law (Chapman-Kolmogorov)") {
    for (double t : {0.5, 2.0}) {
        Kernel k = Kernel::ct_simple_walk(t);
        Kernel k2 = k.with_horizon(2.0 * t);
        for (long m : {0L, 1L, 2L, 6L})
            CHECK(std::abs(autocorrelation(k, m) - k2.mass(0, m)) < 1e-10);
    }
}

TEST_CASE("gap intensity: R-form and P_2T-form agree") {
    for (double t : {0.5, 2.0}) {
        Kernel k = Kernel::ct_simple_walk(t);
        for (long g = 1; g <= 10; ++g)
            CHECK(std::abs(discrete_gap_intensity(k, g) - discrete_gap_intensity_rform(k, g)) <
                  1e-13);
    }
    Kernel pw = Kernel::parity_walk(3);
    for (long g = 2; g <= 8; g += 2)
        CHECK(std::abs(discrete_gap_intensity(pw, g) - discrete_gap_intensity_rform(pw, g)) <
              1e-14);
}

TEST_CASE("gap intensity: guards and off-lattice gaps") {
    Kernel k = Kernel::ct_simple_walk(1.0);
    CHECK_THROWS_AS(discrete_gap_intensity(k, 0), DomainError);
    Kernel pw = Kernel::parity_walk(2);
    CHECK(discrete_gap_intensity(pw, 3) == 0.0); // odd gap on the even sublattice
}

TEST_CASE("telescoping partial sums are exact") {
    Kernel k = Kernel::ct_simple_walk(1.0);
    Kernel k2 = k.with_horizon(2.0);
    for (long n : {1L, 5L, 17L}) {
        double partial = 0.0;
        for (long g = 1; g <= n; ++g) partial += discrete_gap_intensity(k, g);
        double closed = k2.mass(0, 0) + k2.mass(0, 1) - k2.mass(0, n) - k2.mass(0, n + 1);
        CHECK(std::abs(partial - closed) < 1e-12);
    }
    // total intensity
    double total = 0.0;
    for (long g = 1; g <= k2.tail_radius() + 2; ++g) total += discrete_gap_intensity(k, g);
    CHECK(std::abs(total - discrete_gap_total(k)) < 1e-12);
}

TEST_CASE("gap intensity value against the uniformization oracle") {
    // mu({2}) at T = 1 is P_2T(1) - P_2T(3), i.e. e^-4 (I_1(4) - I_3(4))
    Kernel k = Kernel::ct_simple_walk(1.0);
    double expect = oracles::ct_walk_prob(2.0, 1) - oracles::ct_walk_prob(2.0, 3);
    CHECK(std::abs(discrete_gap_intensity(k, 2) - expect) < 1e-12);
}

TEST_CASE("gap pmf: normalization, parity support, tail decay") {
    Kernel k = Kernel::ct_simple_walk(1.0);
    long gmax = k.with_horizon(2.0).tail_radius() + 2;
    auto pmf = discrete_gap_pmf_table(k, gmax);
    double sum = 0.0;
    for (double p : pmf) sum += p;
    CHECK(std::abs(sum - 1.0) < 1e-12);

    // monotone decay beyond the mode
    std::size_t mode = 0;
    for (std::size_t i = 1; i < pmf.size(); ++i)
        if (pmf[i] > pmf[mode]) mode = i;
    for (std::size_t i = mode; i + 1 < pmf.size(); ++i) CHECK(pmf[i + 1] <= pmf[i] + 1e-15);

    Kernel pw = Kernel::parity_walk(2);
    CHECK(discrete_gap_pmf(pw, 3) == 0.0);
    CHECK(discrete_gap_pmf(pw, 2) > 0.0);
    auto ppmf = discrete_gap_pmf_table(pw, 8); // gaps 2, 4, 6, 8
    double psum = 0.0;
    for (double p : ppmf) psum += p;
    CHECK(std::abs(psum - 1.0) < 1e-12);
}

TEST_CASE("rayleigh constants by quadrature") {
    CHECK(rayleigh_total() == doctest::Approx(0.564189583547756).epsilon(1e-12));
    CHECK(survivor_density(1.0) == rayleigh_total());
    CHECK(survivor_density(4.0) == doctest::Approx(0.5 * rayleigh_total()).epsilon(1e-14));

    auto total = integrate_1d([](double g) { return rayleigh_gap_density(g); }, 1e-14, kInf, {},
                              {0.0, std::sqrt(2.0)});
    CHECK(std::abs(total.value - rayleigh_total()) < 1e-8);

    auto mean = integrate_1d([](double g) { return g * rayleigh_gap_pdf(g); }, 1e-14, kInf, {},
                             {0.0, std::sqrt(2.0)});
    CHECK(std::abs(mean.value - kSqrtPi) < 1e-8);

    auto second = integrate_1d([](double g) { return g * g * rayleigh_gap_pdf(g); }, 1e-14, kInf,
                               {}, {0.0, std::sqrt(2.0)});
    CHECK(std::abs(second.value - mean.value * mean.value - (4.0 - M_PI)) < 1e-7);

    // mode of the normalized density at sqrt(2)
    double m = std::sqrt(2.0);
    CHECK(rayleigh_gap_pdf(m) > rayleigh_gap_pdf(m - 1e-3));
    CHECK(rayleigh_gap_pdf(m) > rayleigh_gap_pdf(m + 1e-3));
}

TEST_CASE("single-gap closed form equals the wall integral") {
    for (double t : {0.5, 1.0, 2.0}) {
        for (double g : {0.8, 1.6}) {
            auto r = integrate_1d(
                [&](double u) {
                    return determinant(brownian_m0(WallParticlePattern({u}, {0.0, g}), t));
                },
                -kInf, kInf, {}, {0.5 * g, std::sqrt(t)});
            CHECK(std::abs(r.value - single_gap_intensity(g, t)) < 1e-8);
        }
    }
}

TEST_CASE("joint gap intensity: marginals are the Rayleigh intensity") {
    QuadratureSpec hs;
    hs.relative_tolerance = 1e-8;
    hs.absolute_tolerance = 1e-11;
    for (double g1 : {0.5, 1.0, 2.0}) {
        auto marg = integrate_1d(
            [&](double g2) { return joint_gap_intensity(g1, g2, hs).value; }, 1e-12, 14.0, hs,
            {0.0, 1.5});
        CHECK(std::abs(marg.value - rayleigh_gap_density(g1)) < 5e-7);
    }
}

TEST_CASE("joint gap intensity: anchor, positivity, non-factorization") {
    auto h11 = joint_gap_intensity(1.0, 1.0);
    CHECK(h11.value == doctest::Approx(7.596504221147e-02).epsilon(1e-7)); // regression anchor
    CHECK(h11.error < 1e-8);

    for (double a : {0.3, 1.1, 2.4})
        for (double b : {0.6, 1.7}) CHECK(joint_gap_intensity(a, b).value > -1e-10);

    // h(1,1) * total != marginal(1) * marginal(1): the intensity does not factorize
    double total = rayleigh_total();
    double marg1 = rayleigh_gap_density(1.0);
    double lhs = h11.value * total;
    CHECK(std::abs(lhs - marg1 * marg1) > 10.0 * (h11.error + 1e-8));
}

TEST_CASE("joint gap intensity: exchange symmetry (numerical property)") {
    QuadratureSpec hs;
    hs.relative_tolerance = 1e-8;
    for (auto [a, b] : {std::pair{0.7, 1.9}, std::pair{0.4, 2.6}}) {
        auto hab = joint_gap_intensity(a, b, hs);
        auto hba = joint_gap_intensity(b, a, hs);
        WARN_MESSAGE(std::abs(hab.value - hba.value) <= 2.0 * (hab.error + hba.error),
                     "h(G1,G2) asymmetry beyond quadrature error");
    }
}

TEST_CASE("joint_gap_intensity_k: k=1 and k=2 consistency") {
    double one[1] = {1.3};
    auto k1 = joint_gap_intensity_k(std::span<const double>(one, 1));
    CHECK(std::abs(k1.value - rayleigh_gap_density(1.3)) < 1e-8);

    double two[2] = {0.9, 1.4};
    auto k2 = joint_gap_intensity_k(std::span<const double>(two, 2));
    auto j = joint_gap_intensity(0.9, 1.4);
    CHECK(std::abs(k2.value - j.value) < 1e-10);

    double four[4] = {1, 1, 1, 1};
    CHECK_THROWS_AS(joint_gap_intensity_k(std::span<const double>(four, 4)), DomainError);
}

TEST_CASE("joint_gap_intensity_k: k=3 anchor") {
    QuadratureSpec s3;
    s3.relative_tolerance = 1e-6;
    s3.absolute_tolerance = 1e-9;
    double g[3] = {1.0, 1.0, 1.0};
    auto h3 = joint_gap_intensity_k(std::span<const double>(g, 3), s3);
    CHECK(h3.value == doctest::Approx(2.43367237e-02).epsilon(1e-5)); // regression anchor
    CHECK(h3.value > 0.0);
}

TEST_CASE("scaling convergence to the Rayleigh law") {
    auto rows = scaling_convergence_report(std::vector<double>{1.0, 16.0, 256.0});
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].sup_distance < rows[0].sup_distance);
    CHECK(rows[2].sup_distance < rows[1].sup_distance);
    CHECK(rows[2].sup_distance < 0.01);
    // total intensity times sqrt(pi) times the diffusive scale approaches 1
    CHECK(rows[0].total_scaling < rows[1].total_scaling);
    CHECK(rows[1].total_scaling < rows[2].total_scaling);
    CHECK(std::abs(rows[2].total_scaling - 1.0) < 1e-3);
}

TEST_CASE("joint gap mesh layout") {
    QuadratureSpec hs;
    hs.relative_tolerance = 1e-6;
    hs.absolute_tolerance = 1e-9;
    auto mesh = joint_gap_mesh(6, 1.5, hs);
    REQUIRE(mesh.grid.size() == 6);
    REQUIRE(mesh.values.size() == 36);
    CHECK(mesh.grid.front() == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(mesh.grid.back() == doctest::Approx(1.5).epsilon(1e-14));
    // row-major: values[i * rows + j] = h(grid[i], grid[j])
    auto direct = joint_gap_intensity(mesh.grid[2], mesh.grid[4], hs);
    CHECK(std::abs(mesh.values[2 * 6 + 4] - direct.value) < 1e-9);
    for (double v : mesh.values) CHECK(v > -1e-9);
}
