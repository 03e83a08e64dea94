#pragma once

#include <span>
#include <vector>

#include "coalesce/kernels.hpp"
#include "coalesce/quad.hpp"

namespace coalesce {

/// R(m) = sum_s P_T(0, s) P_T(0, s + m), truncated by the kernel tail bound.
double autocorrelation(const Kernel& kernel, long m);

/// Gap intensity mu({g}): expected gaps of size g per initial-lattice site.
/// Symmetric kernels use P_{2T}(g - d) - P_{2T}(g + d) with d the lattice
/// spacing; gaps off the spacing grid have intensity 0.
double discrete_gap_intensity(const Kernel& kernel, long g);
/// Same quantity through the autocorrelation form R(g - d) - R(g + d).
double discrete_gap_intensity_rform(const Kernel& kernel, long g);
/// Telescoped total sum_g mu({g}) = P_{2T}(0) + P_{2T}(d): the survivor
/// density per initial-lattice site.
double discrete_gap_total(const Kernel& kernel);
double discrete_gap_pmf(const Kernel& kernel, long g);
/// pmf over g = spacing, 2*spacing, ..., gmax (row per multiple).
std::vector<double> discrete_gap_pmf_table(const Kernel& kernel, long gmax);

/// Rescaled-coordinate gap intensity density (G / (2 sqrt(pi))) e^{-G^2/4}.
double rayleigh_gap_density(double gap);
/// Normalized Rayleigh(sqrt 2) pdf (G/2) e^{-G^2/4}.
double rayleigh_gap_pdf(double gap);
/// Total intensity 1/sqrt(pi).
double rayleigh_total();
/// Survivors per unit length at horizon T: 1/sqrt(pi T).
double survivor_density(double horizon);
/// Closed-form single-gap intensity in unrescaled coordinates:
/// (G / (2 sqrt(pi) T^{3/2})) e^{-G^2/(4T)}.
double single_gap_intensity(double gap, double horizon);

/// h(G1, G2): ordered integral over wall positions u < v of det M0 with
/// survivors at 0, G1, G1+G2 in rescaled (T = 1) coordinates.
QuadResult joint_gap_intensity(double g1, double g2, const QuadratureSpec& spec = {});

/// Joint intensity of k <= 3 consecutive gaps (k = 1 and 2 reduce to the
/// single- and two-gap paths).
QuadResult joint_gap_intensity_k(std::span<const double> gaps, const QuadratureSpec& spec = {});

struct GapCorrelation {
    double rho = 0.0;
    double rho_error = 0.0; ///< quadrature discrepancy + propagated h error
    double mean1 = 0.0, mean2 = 0.0;
    double var1 = 0.0, var2 = 0.0;
    double covariance = 0.0;
    double total = 0.0; ///< integral of h, expected 1/sqrt(pi)
};

/// Pearson correlation of consecutive gaps under the normalized joint
/// density, by tensor Gauss-Kronrod moments of h.
GapCorrelation gap_correlation(const QuadratureSpec& spec = {});

/// Convergence row at one horizon. The walk's displacement variance is 2T
/// (rate 1 per direction), so gaps rescale by s = sqrt(2T).
struct ScalingRow {
    double horizon;
    double sup_distance;  ///< sup_g |s pmf(g) - rayleigh_pdf(g/s)|
    double total_scaling; ///< (P_2T(0)+P_2T(1)) sqrt(pi) s, -> 1
};

/// Discrete-to-Rayleigh convergence table for the CT simple walk.
std::vector<ScalingRow> scaling_convergence_report(std::span<const double> horizons);

struct JointGapMesh {
    long rows = 0;
    double gmax = 0.0;
    std::vector<double> grid;   ///< rows grid points gmax * i / rows, i = 1..rows
    std::vector<double> values; ///< row-major h(grid[i], grid[j])
    double max_error = 0.0;
};

JointGapMesh joint_gap_mesh(long rows, double gmax, const QuadratureSpec& spec = {});

} // namespace coalesce
