#include "coalesce/gaps.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "coalesce/detcore.hpp"
#include "coalesce/parallel.hpp"

namespace coalesce {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;

void require_discrete_invariant(const Kernel& kernel, const char* who) {
    if (kernel.state_kind() != StateKind::Discrete)
        throw DomainError(std::string(who) + ": discrete kernel required");
    if (!kernel.translation_invariant())
        throw DomainError(std::string(who) + ": translation-invariant kernel required");
}

} // namespace

double autocorrelation(const Kernel& kernel, long m) {
    require_discrete_invariant(kernel, "autocorrelation");
    long radius = kernel.tail_radius() + std::abs(m);
    double sum = 0.0;
    for (long s = -radius; s <= radius; ++s)
        sum += kernel.mass(0, s) * kernel.mass(0, s + m);
    return sum;
}

double discrete_gap_intensity(const Kernel& kernel, long g) {
    require_discrete_invariant(kernel, "discrete_gap_intensity");
    if (g < 1) throw DomainError("discrete_gap_intensity: g must be >= 1");
    long d = kernel.lattice_spacing();
    if (g % d != 0) return 0.0;
    Kernel doubled = kernel.with_horizon(2.0 * kernel.horizon());
    return doubled.mass(0, g - d) - doubled.mass(0, g + d);
}

double discrete_gap_intensity_rform(const Kernel& kernel, long g) {
    require_discrete_invariant(kernel, "discrete_gap_intensity_rform");
    if (g < 1) throw DomainError("discrete_gap_intensity_rform: g must be >= 1");
    long d = kernel.lattice_spacing();
    if (g % d != 0) return 0.0;
    return autocorrelation(kernel, g - d) - autocorrelation(kernel, g + d);
}

double discrete_gap_total(const Kernel& kernel) {
    require_discrete_invariant(kernel, "discrete_gap_total");
    long d = kernel.lattice_spacing();
    Kernel doubled = kernel.with_horizon(2.0 * kernel.horizon());
    return doubled.mass(0, 0) + doubled.mass(0, d);
}

double discrete_gap_pmf(const Kernel& kernel, long g) {
    return discrete_gap_intensity(kernel, g) / discrete_gap_total(kernel);
}

std::vector<double> discrete_gap_pmf_table(const Kernel& kernel, long gmax) {
    require_discrete_invariant(kernel, "discrete_gap_pmf_table");
    long d = kernel.lattice_spacing();
    Kernel doubled = kernel.with_horizon(2.0 * kernel.horizon());
    double total = doubled.mass(0, 0) + doubled.mass(0, d);
    std::vector<double> pmf;
    for (long g = d; g <= gmax; g += d)
        pmf.push_back((doubled.mass(0, g - d) - doubled.mass(0, g + d)) / total);
    return pmf;
}

double rayleigh_gap_density(double gap) {
    if (!(gap > 0.0)) throw DomainError("rayleigh_gap_density: gap must be > 0");
    return gap / (2.0 * kSqrtPi) * std::exp(-0.25 * gap * gap);
}

double rayleigh_gap_pdf(double gap) {
    if (!(gap > 0.0)) throw DomainError("rayleigh_gap_pdf: gap must be > 0");
    return 0.5 * gap * std::exp(-0.25 * gap * gap);
}

double rayleigh_total() { return 1.0 / kSqrtPi; }

double survivor_density(double horizon) {
    if (!(horizon > 0.0)) throw DomainError("survivor_density: horizon must be > 0");
    return 1.0 / std::sqrt(M_PI * horizon);
}

double single_gap_intensity(double gap, double horizon) {
    if (!(gap > 0.0) || !(horizon > 0.0))
        throw DomainError("single_gap_intensity: gap and horizon must be > 0");
    return gap / (2.0 * kSqrtPi * std::pow(horizon, 1.5)) *
           std::exp(-gap * gap / (4.0 * horizon));
}

namespace {

double m0_det(std::span<const double> walls, std::span<const double> survivors) {
    WallParticlePattern pattern(std::vector<double>(walls.begin(), walls.end()),
                                std::vector<double>(survivors.begin(), survivors.end()));
    return determinant(brownian_m0(pattern, 1.0));
}

DomainHint wall_hint(double span, double radius) {
    // covers [-radius, span + radius]
    return {0.5 * span, 1.0 + 0.5 * span / radius};
}

} // namespace

QuadResult joint_gap_intensity(double g1, double g2, const QuadratureSpec& spec) {
    double gaps[2] = {g1, g2};
    return joint_gap_intensity_k(std::span<const double>(gaps, 2), spec);
}

QuadResult joint_gap_intensity_k(std::span<const double> gaps, const QuadratureSpec& spec) {
    int k = static_cast<int>(gaps.size());
    if (k < 1 || k > 3) throw DomainError("joint_gap_intensity_k: need 1 to 3 gaps");
    std::vector<double> survivors(static_cast<std::size_t>(k) + 1, 0.0);
    for (int i = 0; i < k; ++i) {
        if (!(gaps[static_cast<std::size_t>(i)] > 0.0))
            throw DomainError("joint_gap_intensity_k: gaps must be > 0");
        survivors[static_cast<std::size_t>(i) + 1] =
            survivors[static_cast<std::size_t>(i)] + gaps[static_cast<std::size_t>(i)];
    }
    double span = survivors.back();
    return integrate_ordered_kd(
        [&](std::span<const double> walls) { return m0_det(walls, survivors); },
        k, spec, wall_hint(span, spec.truncation_radius_sigma), {span, 2.0});
}

namespace {

// Kronrod nodes/weights and embedded Gauss weights on [-1, 1], expanded from
// the symmetric table in quad.cpp.
struct NodeSet {
    std::array<double, 15> x, wk, wg;
};

NodeSet kronrod_nodes() {
    constexpr double t[8][3] = {
        {0.000000000000000000000000000000000, 0.417959183673469387755102040816327, 0.209482141084727828012999174891714},
        {0.405845151377397166906606412076961, 0.381830050505118944950369775488975, 0.190350578064785409913256402421014},
        {0.741531185599394439863864773280788, 0.279705391489276667901467771423780, 0.140653259715525918745189590510238},
        {0.949107912342758524526189684047851, 0.129484966168869693270611432679082, 0.063092092629978553290700663189204},
        {0.207784955007898467600689403773245, 0.0, 0.204432940075298892414161999234649},
        {0.586087235467691130294144838258730, 0.0, 0.169004726639267902826583426598550},
        {0.864864423359769072789712788640926, 0.0, 0.104790010322250183839876322541518},
        {0.991455371120812639206854697526329, 0.0, 0.022935322010529224963732008058970},
    };
    NodeSet s{};
    s.x[0] = t[0][0];
    s.wg[0] = t[0][1];
    s.wk[0] = t[0][2];
    int idx = 1;
    for (int i = 1; i < 8; ++i) {
        s.x[static_cast<std::size_t>(idx)] = t[i][0];
        s.wg[static_cast<std::size_t>(idx)] = t[i][1];
        s.wk[static_cast<std::size_t>(idx)] = t[i][2];
        ++idx;
        s.x[static_cast<std::size_t>(idx)] = -t[i][0];
        s.wg[static_cast<std::size_t>(idx)] = t[i][1];
        s.wk[static_cast<std::size_t>(idx)] = t[i][2];
        ++idx;
    }
    return s;
}

struct MomentGrid {
    std::vector<double> nodes;   // gap values
    std::vector<double> wk, wg;  // scaled weights per node
};

MomentGrid moment_grid(double hi) {
    const NodeSet ns = kronrod_nodes();
    std::vector<double> edges = {0.0, 0.75, 1.5, 2.25, 3.0, 4.0, 5.5, 7.5};
    edges.push_back(std::max(hi, 8.5));
    MomentGrid g;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        double mid = 0.5 * (edges[p] + edges[p + 1]);
        double half = 0.5 * (edges[p + 1] - edges[p]);
        for (int i = 0; i < 15; ++i) {
            g.nodes.push_back(mid + half * ns.x[static_cast<std::size_t>(i)]);
            g.wk.push_back(half * ns.wk[static_cast<std::size_t>(i)]);
            g.wg.push_back(half * ns.wg[static_cast<std::size_t>(i)]);
        }
    }
    return g;
}

double corr_from_moments(const std::array<double, 6>& m) {
    // m = {m00, m10, m01, m20, m02, m11}
    double mean1 = m[1] / m[0];
    double mean2 = m[2] / m[0];
    double var1 = m[3] / m[0] - mean1 * mean1;
    double var2 = m[4] / m[0] - mean2 * mean2;
    double cov = m[5] / m[0] - mean1 * mean2;
    return cov / std::sqrt(var1 * var2);
}

} // namespace

GapCorrelation gap_correlation(const QuadratureSpec& spec) {
    spec.validate();
    const double hi = spec.truncation_radius_sigma * std::sqrt(2.0);
    MomentGrid grid = moment_grid(hi);
    const long n = static_cast<long>(grid.nodes.size());

    QuadratureSpec hspec = spec;
    hspec.relative_tolerance = std::max(spec.relative_tolerance, 1e-8);
    hspec.absolute_tolerance = std::max(spec.absolute_tolerance, 1e-12);

    struct Row {
        std::vector<double> h, herr;
    };
    auto rows = parallel_map<Row>(n, [&](long i) {
        Row row;
        row.h.resize(static_cast<std::size_t>(n));
        row.herr.resize(static_cast<std::size_t>(n));
        for (long j = 0; j < n; ++j) {
            auto r = joint_gap_intensity(grid.nodes[static_cast<std::size_t>(i)],
                                         grid.nodes[static_cast<std::size_t>(j)], hspec);
            row.h[static_cast<std::size_t>(j)] = r.value;
            row.herr[static_cast<std::size_t>(j)] = r.error;
        }
        return row;
    });

    std::array<double, 6> mk{}, mg{}, me{};
    for (long i = 0; i < n; ++i) {
        double gi = grid.nodes[static_cast<std::size_t>(i)];
        for (long j = 0; j < n; ++j) {
            double gj = grid.nodes[static_cast<std::size_t>(j)];
            double h = rows[static_cast<std::size_t>(i)].h[static_cast<std::size_t>(j)];
            double herr = rows[static_cast<std::size_t>(i)].herr[static_cast<std::size_t>(j)];
            std::array<double, 6> poly = {1.0, gi, gj, gi * gi, gj * gj, gi * gj};
            double wwk = grid.wk[static_cast<std::size_t>(i)] * grid.wk[static_cast<std::size_t>(j)];
            double wwg = grid.wg[static_cast<std::size_t>(i)] * grid.wg[static_cast<std::size_t>(j)];
            for (int c = 0; c < 6; ++c) {
                mk[static_cast<std::size_t>(c)] += wwk * poly[static_cast<std::size_t>(c)] * h;
                mg[static_cast<std::size_t>(c)] += wwg * poly[static_cast<std::size_t>(c)] * h;
                me[static_cast<std::size_t>(c)] +=
                    std::abs(wwk * poly[static_cast<std::size_t>(c)]) * herr;
            }
        }
    }

    GapCorrelation out;
    out.total = mk[0];
    out.mean1 = mk[1] / mk[0];
    out.mean2 = mk[2] / mk[0];
    out.var1 = mk[3] / mk[0] - out.mean1 * out.mean1;
    out.var2 = mk[4] / mk[0] - out.mean2 * out.mean2;
    out.covariance = mk[5] / mk[0] - out.mean1 * out.mean2;
    out.rho = corr_from_moments(mk);

    // error: Gauss/Kronrod tensor discrepancy plus h-error propagated through
    // the moment map by finite differences
    double err = std::abs(out.rho - corr_from_moments(mg));
    for (int c = 0; c < 6; ++c) {
        double delta = me[static_cast<std::size_t>(c)];
        if (delta == 0.0) continue;
        std::array<double, 6> bumped = mk;
        bumped[static_cast<std::size_t>(c)] += delta;
        err += std::abs(corr_from_moments(bumped) - out.rho);
    }
    out.rho_error = err;
    return out;
}

std::vector<ScalingRow> scaling_convergence_report(std::span<const double> horizons) {
    std::vector<ScalingRow> rows;
    for (double t : horizons) {
        if (!(t > 0.0)) throw DomainError("scaling_convergence_report: horizons must be > 0");
        Kernel kernel = Kernel::ct_simple_walk(t);
        Kernel doubled = kernel.with_horizon(2.0 * t);
        long gmax = doubled.tail_radius() + 2;
        double total = discrete_gap_total(kernel);
        // the walk jumps each direction at rate 1, so its displacement
        // variance is 2t; the diffusive gap scale is sqrt(2t)
        double scale = std::sqrt(2.0 * t);
        double sup = 0.0;
        for (long g = 1; g <= gmax; ++g) {
            double pmf = (doubled.mass(0, g - 1) - doubled.mass(0, g + 1)) / total;
            sup = std::max(sup, std::abs(scale * pmf - rayleigh_gap_pdf(g / scale)));
        }
        rows.push_back({t, sup, total * std::sqrt(M_PI) * scale});
    }
    return rows;
}

JointGapMesh joint_gap_mesh(long rows, double gmax, const QuadratureSpec& spec) {
    if (rows < 2) throw DomainError("joint_gap_mesh: need at least 2 rows");
    if (!(gmax > 0.0)) throw DomainError("joint_gap_mesh: gmax must be > 0");
    JointGapMesh mesh;
    mesh.rows = rows;
    mesh.gmax = gmax;
    mesh.grid.resize(static_cast<std::size_t>(rows));
    for (long i = 0; i < rows; ++i)
        mesh.grid[static_cast<std::size_t>(i)] = gmax * static_cast<double>(i + 1) / static_cast<double>(rows);

    auto values = parallel_map<std::pair<std::vector<double>, double>>(rows, [&](long i) {
        std::vector<double> row(static_cast<std::size_t>(rows));
        double emax = 0.0;
        for (long j = 0; j < rows; ++j) {
            auto r = joint_gap_intensity(mesh.grid[static_cast<std::size_t>(i)],
                                         mesh.grid[static_cast<std::size_t>(j)], spec);
            row[static_cast<std::size_t>(j)] = r.value;
            emax = std::max(emax, r.error);
        }
        return std::make_pair(std::move(row), emax);
    });
    mesh.values.reserve(static_cast<std::size_t>(rows * rows));
    for (auto& [row, emax] : values) {
        mesh.values.insert(mesh.values.end(), row.begin(), row.end());
        mesh.max_error = std::max(mesh.max_error, emax);
    }
    return mesh;
}

} // namespace coalesce
