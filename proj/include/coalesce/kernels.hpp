#pragma once

#include <vector>

#include "coalesce/errors.hpp"

namespace coalesce {

enum class KernelFamily {
    CtSimpleWalk,      ///< continuous-time +/-1 walk on Z, each direction at rate 1
    ParityWalk,        ///< synchronous +/-1 walk, one checkerboard sublattice occupied
    Gaussian,          ///< Brownian motion on R
    ReflectedGaussian, ///< Brownian motion on [0, inf) reflected at 0
};

enum class StateKind { Discrete, Continuous };

/// A transition law at a fixed time horizon T.
///
/// Discrete families expose point masses P(x,y) and cumulative sums
/// F(x,y) = sum_{z<=y} P(x,z). Continuous families expose the density
/// p_x(y), the CDF F_x(y), and the source derivatives d/dx of both,
/// which supply the derivative rows of the refined matrices.
///
/// Instances are immutable after construction and safe to share across
/// threads. The horizon never changes on an instance; evaluating at a
/// doubled time means constructing a second instance (see with_horizon).
class Kernel {
public:
    static Kernel ct_simple_walk(double horizon);
    /// Synchronous walk over `steps` time steps; initial particles occupy the
    /// sublattice { x : x == occupied_parity (mod 2) }. All coordinates stay
    /// on the original integer lattice, so the effective spacing is 2.
    static Kernel parity_walk(long steps, int occupied_parity = 0);
    static Kernel gaussian(double horizon);
    static Kernel reflected_gaussian(double horizon);

    KernelFamily family() const { return family_; }
    StateKind state_kind() const;
    double horizon() const { return horizon_; }

    /// New instance of the same family at a different horizon.
    Kernel with_horizon(double t) const;

    /// Initial-lattice spacing for discrete families (1 or 2).
    long lattice_spacing() const;
    long steps() const;
    int occupied_parity() const;
    /// All wired-in families are symmetric and translation invariant
    /// (the reflected kernel is the exception for translation).
    bool translation_invariant() const { return family_ != KernelFamily::ReflectedGaussian; }

    // --- discrete interface ---------------------------------------------

    /// P_T(x, y). Throws DomainError when the parity walk cannot place a
    /// particle from x at y at this horizon (a parity violation signals a
    /// caller bug; an out-of-range y is a legitimate 0).
    double point_prob(long x, long y) const;
    /// F_T(x, y) = sum_{z <= y} P_T(x, z). Defined for every integer y.
    double cumulative(long x, long y) const;
    /// P_T(x, y) with parity violations mapped to 0 (for whole-lattice sums).
    double mass(long x, long y) const;
    /// Parity admissibility of target y from source x at this horizon.
    bool admissible_target(long x, long y) const;
    /// admissible_target and within reach (P could be positive).
    bool reachable(long x, long y) const;
    /// Displacement radius beyond which the remaining tail mass is < 1e-16.
    long tail_radius() const;

    // --- continuous interface -------------------------------------------

    double density(double x, double y) const;
    double cdf(double x, double y) const;
    /// d/dx p_x(y)
    double d_source_density(double x, double y) const;
    /// d/dx F_x(y)
    double d_source_cdf(double x, double y) const;

    // --- unified access for matrix builders ------------------------------

    /// P or p depending on state kind; sites passed as exact doubles.
    double weight(double x, double y) const;
    /// F (cumulative or CDF).
    double cum(double x, double y) const;

private:
    Kernel() = default;
    void build_ct_tables();
    void build_parity_tables();

    KernelFamily family_ = KernelFamily::CtSimpleWalk;
    double horizon_ = 0.0;
    long steps_ = 0;
    int parity_ = 0;

    // CT walk: pmf_[n] = P_T(0, n) for n in [0, tail_], suffix_[n] = sum_{m>=n} pmf_[m]
    std::vector<double> pmf_;
    std::vector<double> suffix_;
    long tail_ = 0;

    // parity walk: binom_[j] = C(steps, j) 2^-steps, prefix_[j] = sum_{i<=j} binom_[i]
    std::vector<double> binom_;
    std::vector<double> prefix_;
};

// Spec-level operation surface: evaluation at an explicit time t constructs a
// second instance when t differs from the kernel's horizon.
double point_prob(const Kernel& kernel, long x, long y, double t);
double cumulative(const Kernel& kernel, long x, long y, double t);

/// Scaled modified Bessel function e^{-x} I_n(x) for n >= 0, x >= 0.
/// Ascending series for x <= 30, downward Miller recurrence with
/// normalization otherwise.
double bessel_i_scaled(long n, double x);

double std_normal_pdf(double z);
double std_normal_cdf(double z);

} // namespace coalesce
