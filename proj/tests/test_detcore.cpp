#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "coalesce/detcore.hpp"
#include "coalesce/rng.hpp"
#include "coalesce/sim.hpp"
#include "support/oracles.hpp"

using namespace coalesce;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// all strictly increasing tuples of length k from a site list
void tuples(const std::vector<long>& sites, long k, std::vector<long>& cur,
            const std::function<void(const std::vector<long>&)>& emit, std::size_t from = 0) {
    if (static_cast<long>(cur.size()) == k) {
        emit(cur);
        return;
    }
    for (std::size_t i = from; i < sites.size(); ++i) {
        cur.push_back(sites[i]);
        tuples(sites, k, cur, emit, i + 1);
        cur.pop_back();
    }
}

std::vector<std::vector<long>> compositions(long n) {
    std::vector<std::vector<long>> out;
    for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
        std::vector<long> parts;
        long run = 1;
        for (long i = 0; i < n - 1; ++i) {
            if (mask & (1u << i)) {
                parts.push_back(run);
                run = 1;
            } else {
                ++run;
            }
        }
        parts.push_back(run);
        out.push_back(parts);
    }
    return out;
}

} // namespace

TEST_CASE("determinant: identity, singular, cofactor oracle") {
    SquareMatrix id(4);
    for (long i = 0; i < 4; ++i) id.at(i, i) = 1.0;
    CHECK(determinant(id) == 1.0);

    SquareMatrix sing(3);
    for (long j = 0; j < 3; ++j) {
        sing.at(0, j) = 1.0 + static_cast<double>(j);
        sing.at(1, j) = 1.0 + static_cast<double>(j); // repeated row
        sing.at(2, j) = static_cast<double>(j * j);
    }
    CHECK(std::abs(determinant(sing)) < 1e-14);

    Rng rng(918273);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<std::vector<double>> a(3, std::vector<double>(3));
        SquareMatrix m(3);
        for (long i = 0; i < 3; ++i)
            for (long j = 0; j < 3; ++j) {
                double v = 2.0 * rng.uniform() - 1.0;
                a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
                m.at(i, j) = v;
            }
        CHECK(std::abs(determinant(m) - oracles::cofactor_det(a)) < 1e-12);
    }

    SquareMatrix bad(2);
    bad.at(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(determinant(bad), DomainError);
}

TEST_CASE("coalescence matrix: pattern 2+1 layout") {
    Kernel k = Kernel::ct_simple_walk(0.7);
    std::vector<double> starts = {0, 1, 2};
    std::vector<double> survivors = {1, 3};
    SquareMatrix m = coalescence_matrix(k, starts, CoalescencePattern({2, 1}), survivors);
    REQUIRE(m.order() == 3);
    for (long i = 0; i < 3; ++i) {
        long x = static_cast<long>(starts[static_cast<std::size_t>(i)]);
        CHECK(m.at(i, 0) == k.point_prob(x, 1));
        // the staircase -1 sits in row 1 of the F column only
        CHECK(m.at(i, 1) == k.cumulative(x, 1) - (i == 0 ? 1.0 : 0.0));
        CHECK(m.at(i, 2) == k.point_prob(x, 3));
    }
}

TEST_CASE("coalescence matrix: single particle") {
    Kernel k = Kernel::ct_simple_walk(1.0);
    std::vector<double> starts = {2};
    std::vector<double> survivors = {5};
    SquareMatrix m = coalescence_matrix(k, starts, CoalescencePattern({1}), survivors);
    REQUIRE(m.order() == 1);
    CHECK(m.at(0, 0) == k.point_prob(2, 5));
    auto p = coalescence_probability(k, starts, CoalescencePattern({1}), survivors);
    CHECK(p.value == k.point_prob(2, 5));
}

TEST_CASE("coalescence determinant vs DP oracle: Karlin-McGregor pair") {
    Kernel k = Kernel::parity_walk(2);
    std::vector<long> starts = {0, 2};
    std::vector<long> sites = {-2, 0, 2, 4};
    CoalescencePattern pat({1, 1});
    std::vector<long> cur;
    long checked = 0;
    tuples(sites, 2, cur, [&](const std::vector<long>& surv) {
        double dp = dp::coalescence_probability(starts, 2, pat, surv);
        std::vector<double> s(starts.begin(), starts.end());
        std::vector<double> y(surv.begin(), surv.end());
        auto det = coalescence_probability(k, s, pat, y);
        CHECK(std::abs(det.value - dp) < 1e-14);
        ++checked;
    });
    CHECK(checked == 6);
}

TEST_CASE("coalescence determinant vs DP oracle: full merge and 2+1") {
    {
        Kernel k = Kernel::parity_walk(2);
        std::vector<long> starts = {0, 2};
        CoalescencePattern pat({2});
        for (long y : {0L, 2L, 4L}) {
            double dp = dp::coalescence_probability(starts, 2, pat, std::vector<long>{y});
            auto det = coalescence_probability(k, std::vector<double>{0, 2}, pat,
                                               std::vector<double>{static_cast<double>(y)});
            CHECK(std::abs(det.value - dp) < 1e-14);
        }
    }
    {
        Kernel k = Kernel::parity_walk(3);
        std::vector<long> starts = {0, 2, 4};
        CoalescencePattern pat({2, 1});
        std::vector<long> sites = {-3, -1, 1, 3, 5, 7};
        std::vector<long> cur;
        tuples(sites, 2, cur, [&](const std::vector<long>& surv) {
            double dp = dp::coalescence_probability(starts, 3, pat, surv);
            auto det = coalescence_probability(k, std::vector<double>{0, 2, 4}, pat,
                                               std::vector<double>(surv.begin(), surv.end()));
            CHECK(std::abs(det.value - dp) < 1e-14);
        });
    }
}

TEST_CASE("coalescence probability: inadmissible survivors short-circuit to 0") {
    Kernel k = Kernel::parity_walk(2);
    // wrong parity
    auto p = coalescence_probability(k, std::vector<double>{0, 2}, CoalescencePattern({2}),
                                     std::vector<double>{1});
    CHECK(p.value == 0.0);
    // out of reach for every particle in the block
    auto q = coalescence_probability(k, std::vector<double>{0, 2}, CoalescencePattern({2}),
                                     std::vector<double>{8});
    CHECK(q.value == 0.0);
}

TEST_CASE("summation over all patterns and survivors is total probability") {
    for (long steps : {2L, 3L}) {
        Kernel k = Kernel::parity_walk(steps);
        std::vector<double> starts = {0, 2, 4};
        std::vector<long> sites;
        long parity = ((steps % 2) + 2) % 2; // survivors sit at 0 + steps mod 2
        for (long s = -steps; s <= 4 + steps; ++s)
            if ((((s % 2) + 2) % 2) == parity) sites.push_back(s);
        double total = 0.0;
        for (const auto& parts : compositions(3)) {
            CoalescencePattern pat(parts);
            std::vector<long> cur;
            tuples(sites, pat.k(), cur, [&](const std::vector<long>& surv) {
                total += coalescence_probability(
                             k, starts, pat, std::vector<double>(surv.begin(), surv.end()))
                             .value;
            });
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
    }
}

TEST_CASE("wall-particle matrix: 1+2+1 column structure and staircase") {
    Kernel k = Kernel::parity_walk(2);
    WallParticlePattern pat({-1.0, 3.0}, {-2.0, 0.0, 4.0});
    SquareMatrix m = wall_particle_matrix(k, pat);
    REQUIRE(m.order() == 4);
    std::vector<long> rows = {-2, 0, 2, 4}; // a1 b1 a2 b2
    for (long i = 0; i < 4; ++i) {
        long x = rows[static_cast<std::size_t>(i)];
        CHECK(m.at(i, 0) == k.point_prob(x, -2));
        CHECK(m.at(i, 1) == k.point_prob(x, 0));
        // staircase: F - 1 in the rows of wall 1, F in the rows of wall 2
        CHECK(m.at(i, 2) == k.cumulative(x, 0) - (i < 2 ? 1.0 : 0.0));
        CHECK(m.at(i, 3) == k.point_prob(x, 4));
    }
}

TEST_CASE("wall-particle matrix: k=1 is the bare Karlin-McGregor pair") {
    Kernel k = Kernel::parity_walk(2);
    WallParticlePattern pat({1.0}, {0.0, 2.0});
    SquareMatrix m = wall_particle_matrix(k, pat);
    REQUIRE(m.order() == 2);
    CHECK(m.at(0, 0) == k.point_prob(0, 0));
    CHECK(m.at(0, 1) == k.point_prob(0, 2));
    CHECK(m.at(1, 0) == k.point_prob(2, 0));
    CHECK(m.at(1, 1) == k.point_prob(2, 2));
}

TEST_CASE("wall-particle determinant vs DP oracle on a fully occupied window") {
    {
        Kernel k = Kernel::parity_walk(2);
        WallParticlePattern pat({1.0}, {0.0, 2.0});
        double det = determinant(wall_particle_matrix(k, pat));
        double dp = dp::wall_particle_probability(std::vector<long>{1}, std::vector<long>{0, 2}, 2);
        CHECK(std::abs(det - dp) < 1e-14);
    }
    {
        Kernel k = Kernel::parity_walk(2);
        WallParticlePattern pat({-1.0, 3.0}, {-2.0, 0.0, 4.0});
        double det = determinant(wall_particle_matrix(k, pat));
        double dp = dp::wall_particle_probability(std::vector<long>{-1, 3},
                                                  std::vector<long>{-2, 0, 4}, 2);
        CHECK(std::abs(det - dp) < 1e-14);
    }
}

TEST_CASE("multi-pattern matrix: layout and degenerate single pattern") {
    Kernel k = Kernel::parity_walk(2);
    WallParticlePattern p1({-5.0, -1.0}, {-6.0, -4.0, 0.0});
    WallParticlePattern p2({5.0}, {4.0, 6.0});
    std::vector<WallParticlePattern> ps = {p1, p2};
    SquareMatrix m = multi_pattern_matrix(k, ps);
    REQUIRE(m.order() == 6);
    std::vector<long> rows = {-6, -4, -2, 0, 4, 6};
    for (long i = 0; i < 6; ++i) {
        long x = rows[static_cast<std::size_t>(i)];
        CHECK(m.at(i, 0) == k.point_prob(x, -6));
        CHECK(m.at(i, 1) == k.point_prob(x, -4));
        // exactly one F column, for the interior survivor of pattern 1
        CHECK(m.at(i, 2) == k.cumulative(x, -4) - (i < 2 ? 1.0 : 0.0));
        CHECK(m.at(i, 3) == k.point_prob(x, 0));
        CHECK(m.at(i, 4) == k.point_prob(x, 4));
        CHECK(m.at(i, 5) == k.point_prob(x, 6));
    }

    std::vector<WallParticlePattern> single = {p1};
    SquareMatrix a = multi_pattern_matrix(k, single);
    SquareMatrix b = wall_particle_matrix(k, p1);
    REQUIRE(a.order() == b.order());
    for (long i = 0; i < a.order(); ++i)
        for (long j = 0; j < a.order(); ++j) CHECK(a.at(i, j) == b.at(i, j));
}

TEST_CASE("multi-pattern determinant vs DP oracle") {
    Kernel k = Kernel::parity_walk(2);
    WallParticlePattern p1({-3.0}, {-4.0, -2.0});
    WallParticlePattern p2({3.0}, {2.0, 4.0});
    std::vector<WallParticlePattern> ps = {p1, p2};
    double det = determinant(multi_pattern_matrix(k, ps));
    std::vector<dp::PatternSpec> spec = {{{-3}, {-4, -2}}, {{3}, {2, 4}}};
    double dp_val = dp::multi_pattern_probability(spec, 2);
    CHECK(std::abs(det - dp_val) < 1e-14);
    CHECK(det > 0.0);
}

TEST_CASE("wall-particle and multi-pattern input guards") {
    Kernel k = Kernel::parity_walk(2);
    // adjacent walls share a flanking site
    CHECK_THROWS_AS(wall_particle_matrix(k, WallParticlePattern({-1.0, 1.0}, {-2.0, 0.0, 2.0})),
                    DomainError);
    // overlapping patterns: survivor sequences collide
    WallParticlePattern p1({-1.0}, {-2.0, 0.0});
    WallParticlePattern p2({3.0}, {0.0, 4.0});
    std::vector<WallParticlePattern> ps = {p1, p2};
    CHECK_THROWS_AS(multi_pattern_matrix(k, ps), DomainError);
}

TEST_CASE("brownian M0: k=1 closed form") {
    for (double t : {0.5, 1.0, 3.0}) {
        WallParticlePattern pat({0.4}, {-0.9, 1.7});
        double det = determinant(brownian_m0(pat, t));
        Kernel g = Kernel::gaussian(t);
        double expect = g.density(0.4, -0.9) * g.density(0.4, 1.7) * (1.7 - (-0.9)) / t;
        CHECK(det == doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("brownian M0: k=2 entries in rescaled coordinates") {
    double u = -0.3, v = 0.9, g1 = 1.1, g2 = 0.7;
    double s = g1 + g2;
    WallParticlePattern pat({u, v}, {0.0, g1, s});
    SquareMatrix m = brownian_m0(pat, 1.0);
    REQUIRE(m.order() == 4);
    auto phi = [](double z) { return std_normal_pdf(z); };
    auto Phi = [](double z) { return std_normal_cdf(z); };
    // wall u rows
    CHECK(m.at(0, 0) == doctest::Approx(phi(u)).epsilon(1e-15));
    CHECK(m.at(0, 1) == doctest::Approx(phi(g1 - u)).epsilon(1e-15));
    CHECK(m.at(0, 2) == doctest::Approx(Phi(g1 - u) - 1.0).epsilon(1e-15));
    CHECK(m.at(0, 3) == doctest::Approx(phi(s - u)).epsilon(1e-15));
    CHECK(m.at(1, 0) == doctest::Approx(-u * phi(u)).epsilon(1e-15));
    CHECK(m.at(1, 1) == doctest::Approx((g1 - u) * phi(g1 - u)).epsilon(1e-15));
    CHECK(m.at(1, 2) == doctest::Approx(-phi(g1 - u)).epsilon(1e-15));
    CHECK(m.at(1, 3) == doctest::Approx((s - u) * phi(s - u)).epsilon(1e-15));
    // wall v rows: F column without the staircase shift
    CHECK(m.at(2, 2) == doctest::Approx(Phi(g1 - v)).epsilon(1e-15));
    CHECK(m.at(3, 2) == doctest::Approx(-phi(g1 - v)).epsilon(1e-15));
    CHECK(m.at(2, 0) == doctest::Approx(phi(v)).epsilon(1e-15));
    CHECK(m.at(3, 3) == doctest::Approx((s - v) * phi(s - v)).epsilon(1e-15));
}

TEST_CASE("brownian M0 is the epsilon-refinement limit of the discrete matrix") {
    const double eps = 1e-4;
    Kernel g = Kernel::gaussian(1.0);
    {
        // k = 1: det(discrete pair rows) / eps -> det(M0)
        double x = 0.2, y0 = -0.8, y1 = 1.1;
        std::vector<double> starts = {x - eps / 2, x + eps / 2};
        SquareMatrix d = coalescence_matrix(g, starts, CoalescencePattern({1, 1}),
                                            std::vector<double>{y0, y1});
        double refined = determinant(d) / eps;
        double m0 = determinant(brownian_m0(WallParticlePattern({x}, {y0, y1}), 1.0));
        CHECK(std::abs(refined / m0 - 1.0) < 1e-3);
    }
    {
        // k = 2: det / eps^2 -> det(M0)
        double x1 = -0.5, x2 = 0.7;
        std::vector<double> starts = {x1 - eps / 2, x1 + eps / 2, x2 - eps / 2, x2 + eps / 2};
        std::vector<double> survivors = {-1.2, 0.3, 1.5};
        SquareMatrix d = coalescence_matrix(g, starts, CoalescencePattern({1, 2, 1}), survivors);
        double refined = determinant(d) / (eps * eps);
        double m0 = determinant(brownian_m0(WallParticlePattern({x1, x2}, survivors), 1.0));
        CHECK(std::abs(refined / m0 - 1.0) < 1e-3);
    }
}

TEST_CASE("half-line M0: k=1 matrix entries") {
    double x = 0.8, y0 = 0.5, y1 = 1.9, t = 1.3;
    Kernel r = Kernel::reflected_gaussian(t);
    SquareMatrix m = halfline_m0(WallParticlePattern({x}, {y0, y1}), t);
    REQUIRE(m.order() == 3);
    CHECK(m.at(0, 0) == r.density(0.0, y0));
    CHECK(m.at(0, 1) == r.cdf(0.0, y0) - 1.0);
    CHECK(m.at(0, 2) == r.density(0.0, y1));
    CHECK(m.at(1, 0) == r.density(x, y0));
    CHECK(m.at(1, 1) == r.cdf(x, y0)); // no staircase on the wall's own block
    CHECK(m.at(1, 2) == r.density(x, y1));
    CHECK(m.at(2, 0) == r.d_source_density(x, y0));
    CHECK(m.at(2, 1) == r.d_source_cdf(x, y0));
    CHECK(m.at(2, 2) == r.d_source_density(x, y1));
}

TEST_CASE("half-line M0: nonnegative on random admissible patterns") {
    Rng rng(55117);
    for (int rep = 0; rep < 100; ++rep) {
        long k = 1 + static_cast<long>(rng.next() % 3);
        std::vector<double> walls, survivors;
        double w = 0.0;
        for (long i = 0; i < k; ++i) walls.push_back(w += 0.2 + 2.0 * rng.uniform());
        double y = 0.0;
        for (long i = 0; i <= k; ++i) survivors.push_back(y += 0.2 + 2.0 * rng.uniform());
        double det = determinant(halfline_m0(WallParticlePattern(walls, survivors), 1.0));
        CHECK(det >= -1e-12);
    }
}

TEST_CASE("half-line M0 far from the boundary: reflection terms vanish") {
    // 10 sqrt(T) out, the image terms are below double precision and the
    // boundary row carries an exact factor 2, so the determinant equals twice
    // the image-free determinant built from the plain Gaussian kernel.
    double t = 1.0, x = 12.0, y0 = 11.2, y1 = 13.1;
    double det_half = determinant(halfline_m0(WallParticlePattern({x}, {y0, y1}), t));
    Kernel g = Kernel::gaussian(t);
    SquareMatrix plain(3);
    plain.at(0, 0) = g.density(0.0, y0);
    plain.at(0, 1) = g.cdf(0.0, y0) - 1.0;
    plain.at(0, 2) = g.density(0.0, y1);
    plain.at(1, 0) = g.density(x, y0);
    plain.at(1, 1) = g.cdf(x, y0);
    plain.at(1, 2) = g.density(x, y1);
    plain.at(2, 0) = g.d_source_density(x, y0);
    plain.at(2, 1) = g.d_source_cdf(x, y0);
    plain.at(2, 2) = g.d_source_density(x, y1);
    CHECK(std::abs(det_half / (2.0 * determinant(plain)) - 1.0) < 1e-6);
}

TEST_CASE("warren: single particle and saturated thresholds") {
    Kernel k = Kernel::ct_simple_walk(0.9);
    auto p = warren_cdf(k, std::vector<double>{0}, std::vector<double>{2});
    CHECK(p.value == k.cumulative(0, 2));

    auto sat = warren_cdf(k, std::vector<double>{-1, 0, 2}, std::vector<double>{kInf, kInf, kInf});
    CHECK(sat.value == 1.0); // F = 1 exactly via the sentinel
}

TEST_CASE("warren determinant vs DP oracle") {
    Kernel k = Kernel::parity_walk(2);
    auto p = warren_cdf(k, std::vector<double>{0, 2}, std::vector<double>{0, 2});
    double dp = dp::warren_cdf(std::vector<long>{0, 2}, 2, std::vector<double>{0, 2});
    CHECK(std::abs(p.value - dp) < 1e-14);

    Kernel k3 = Kernel::parity_walk(3);
    auto q = warren_cdf(k3, std::vector<double>{0, 2, 6}, std::vector<double>{-1, 3, 5});
    double dq = dp::warren_cdf(std::vector<long>{0, 2, 6}, 3, std::vector<double>{-1, 3, 5});
    CHECK(std::abs(q.value - dq) < 1e-14);
}

TEST_CASE("warren cdf: monotone in each threshold and within probability bounds") {
    Kernel k = Kernel::ct_simple_walk(1.1);
    Rng rng(40123);
    for (int rep = 0; rep < 50; ++rep) {
        long n = 2 + static_cast<long>(rng.next() % 2);
        std::vector<double> starts;
        long s = -3;
        for (long i = 0; i < n; ++i)
            starts.push_back(static_cast<double>(s += 1 + static_cast<long>(rng.next() % 3)));
        std::vector<double> th;
        long t0 = -4;
        for (long i = 0; i < n; ++i)
            th.push_back(static_cast<double>(t0 += static_cast<long>(rng.next() % 3)));
        auto base = warren_cdf(k, starts, th);
        CHECK(base.value >= -1e-12);
        CHECK(base.value <= 1.0 + 1e-12);
        // raise one threshold (keeping the ladder nondecreasing): cdf must not drop
        std::size_t idx = static_cast<std::size_t>(rng.next() % static_cast<std::uint64_t>(n));
        std::vector<double> up = th;
        up[idx] += 1.0;
        for (std::size_t j = idx + 1; j < up.size(); ++j) up[j] = std::max(up[j], up[idx]);
        auto raised = warren_cdf(k, starts, up);
        CHECK(raised.value >= base.value - 1e-13);
    }
}

TEST_CASE("warren matrix rejects decreasing thresholds and length mismatch") {
    Kernel k = Kernel::ct_simple_walk(1.0);
    CHECK_THROWS_AS(warren_cdf(k, std::vector<double>{0, 1}, std::vector<double>{2, 1}),
                    DomainError);
    CHECK_THROWS_AS(warren_cdf(k, std::vector<double>{0, 1}, std::vector<double>{2}), DomainError);
}

TEST_CASE("row-level and block-level staircases agree on wall-particle patterns") {
    Kernel k = Kernel::parity_walk(3);
    WallParticlePattern pat({-5.0, -1.0, 3.0}, {-7.0, -3.0, 1.0, 5.0});
    SquareMatrix rowform = wall_particle_matrix(k, pat);

    // independent block-form construction; wall w (half-integer
    // index w + 1/2) carries the Iverson shift on the F column of survivor j
    // exactly when w + 1/2 < j
    long kk = pat.k();
    SquareMatrix blockform(2 * kk);
    for (long w = 0; w < kk; ++w) {
        auto [a, b] = wall_flanks(k, pat.walls[static_cast<std::size_t>(w)]);
        for (long j = 0; j <= kk; ++j) {
            double y = pat.survivors[static_cast<std::size_t>(j)];
            long pc = j == 0 ? 0 : (j < kk ? 2 * j - 1 : 2 * kk - 1);
            blockform.at(2 * w, pc) = k.weight(a, y);
            blockform.at(2 * w + 1, pc) = k.weight(b, y);
            if (j >= 1 && j <= kk - 1) {
                double shift = (w < j) ? 1.0 : 0.0;
                blockform.at(2 * w, 2 * j) = k.cum(a, y) - shift;
                blockform.at(2 * w + 1, 2 * j) = k.cum(b, y) - shift;
            }
        }
    }
    for (long i = 0; i < 2 * kk; ++i)
        for (long j = 0; j < 2 * kk; ++j) CHECK(rowform.at(i, j) == blockform.at(i, j));
}

TEST_CASE("wall-particle determinant invariant under the refinement row operation") {
    Kernel k = Kernel::parity_walk(3);
    WallParticlePattern pat({-5.0, -1.0, 3.0}, {-7.0, -3.0, 1.0, 5.0});
    SquareMatrix m = wall_particle_matrix(k, pat);
    double before = determinant(m);
    SquareMatrix op(m.order());
    for (long i = 0; i < m.order(); ++i)
        for (long j = 0; j < m.order(); ++j) op.at(i, j) = m.at(i, j);
    for (long w = 0; w < pat.k(); ++w)
        for (long j = 0; j < m.order(); ++j)
            op.at(2 * w + 1, j) -= m.at(2 * w, j); // subtract row a_i from row b_i
    double after = determinant(op);
    CHECK(std::abs(after - before) <= 1e-14 * std::max(1.0, std::abs(before)));
}

TEST_CASE("probability bounds for discrete determinants") {
    Kernel k = Kernel::parity_walk(2);
    Rng rng(77001);
    for (int rep = 0; rep < 60; ++rep) {
        std::vector<long> starts;
        long s = -6;
        for (int i = 0; i < 3; ++i)
            starts.push_back(s += 2 + 2 * static_cast<long>(rng.next() % 2));
        auto comps = compositions(3);
        const auto& parts = comps[rng.next() % comps.size()];
        CoalescencePattern pat(parts);
        std::vector<long> sites;
        for (long y = starts.front() - 2; y <= starts.back() + 2; y += 2) sites.push_back(y);
        std::vector<long> cur;
        tuples(sites, pat.k(), cur, [&](const std::vector<long>& surv) {
            auto p = coalescence_probability(k, std::vector<double>(starts.begin(), starts.end()),
                                             pat, std::vector<double>(surv.begin(), surv.end()));
            CHECK(p.value >= -1e-12);
            CHECK(p.value <= 1.0 + 1e-12);
        });
    }
}
