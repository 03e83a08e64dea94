#pragma once

#include <span>
#include <vector>

#include "coalesce/kernels.hpp"

namespace coalesce {

/// Integer composition n_1 + ... + n_k = n assigning the first n_1 initial
/// particles to survivor 1, the next n_2 to survivor 2, and so on.
class CoalescencePattern {
public:
    explicit CoalescencePattern(std::vector<long> parts);
    long n() const { return n_; }
    long k() const { return static_cast<long>(parts_.size()); }
    const std::vector<long>& parts() const { return parts_; }
    /// 0-based first column index of block l.
    long first_index(long l) const { return prefix_[static_cast<std::size_t>(l)]; }
    /// 0-based block containing column j.
    long block_of(long j) const;

private:
    std::vector<long> parts_;
    std::vector<long> prefix_;
    long n_ = 0;
};

/// k ordered walls plus k+1 ordered survivors. Walls are time-0 coordinates
/// (lattice midpoints in the discrete case), survivors time-T coordinates;
/// there is no ordering constraint between the two sequences.
struct WallParticlePattern {
    std::vector<double> walls;
    std::vector<double> survivors;

    WallParticlePattern(std::vector<double> walls_in, std::vector<double> survivors_in);
    long k() const { return static_cast<long>(walls.size()); }
};

class SquareMatrix {
public:
    explicit SquareMatrix(long order) : order_(order), a_(static_cast<std::size_t>(order * order), 0.0) {}
    long order() const { return order_; }
    double& at(long i, long j) { return a_[static_cast<std::size_t>(i * order_ + j)]; }
    double at(long i, long j) const { return a_[static_cast<std::size_t>(i * order_ + j)]; }

private:
    long order_;
    std::vector<double> a_;
};

/// LU with partial pivoting; throws DomainError on non-finite entries.
double determinant(const SquareMatrix& m);

struct ProbResult {
    double value = 0.0;
    bool clamped = false; ///< value adjusted into range
    bool flagged = false; ///< adjustment exceeded the 1e-12 tolerance
};

/// The coalescence matrix: row i, column j (j in block l, survivor y_l) is
/// P(x_i, y_l) when j is the first column of its block and
/// F(x_i, y_l) - [i < j] otherwise. The staircase is applied per row.
SquareMatrix coalescence_matrix(const Kernel& kernel,
                                std::span<const double> starts,
                                const CoalescencePattern& pattern,
                                std::span<const double> survivors);

/// det of the coalescence matrix: a probability mass for discrete kernels, a
/// joint density for continuous ones. Inadmissible survivors (parity or
/// reach) short-circuit to exactly 0; negatives beyond -1e-12 throw.
ProbResult coalescence_probability(const Kernel& kernel,
                                   std::span<const double> starts,
                                   const CoalescencePattern& pattern,
                                   std::span<const double> survivors);

/// 2k x 2k matrix for the consecutive wall-particle pattern: the coalescence
/// matrix of the flanking sites (a_1, b_1, ..., a_k, b_k) under the
/// composition 1+2+...+2+1.
SquareMatrix wall_particle_matrix(const Kernel& kernel, const WallParticlePattern& pattern);

/// 2K x 2K matrix for m separated patterns observed simultaneously; between
/// patterns the boundary survivors contribute single P columns only.
SquareMatrix multi_pattern_matrix(const Kernel& kernel,
                                  std::span<const WallParticlePattern> patterns);

/// Refined wall-particle matrix for Brownian motion: per wall one density row
/// (p, F - [.]) and one source-derivative row (dp/dx, dF/dx), same column
/// structure as the discrete matrix.
SquareMatrix brownian_m0(const WallParticlePattern& pattern, double horizon);

/// (2k+1) x (2k+1) half-line matrix: first row from a particle at the
/// reflecting boundary 0, then k density/derivative row-pairs, columns
/// organized as the composition 2+2+...+2+1. Reflected kernel throughout.
SquareMatrix halfline_m0(const WallParticlePattern& pattern, double horizon);

/// M^W_ij = F(x_i, y_j) - [i < j]; thresholds nondecreasing, +inf accepted as
/// a sentinel mapped to F = 1 exactly.
SquareMatrix warren_matrix(const Kernel& kernel,
                           std::span<const double> starts,
                           std::span<const double> thresholds);

/// det(M^W) clamped to [0, 1]; flagged when outside by more than 1e-12.
ProbResult warren_cdf(const Kernel& kernel,
                      std::span<const double> starts,
                      std::span<const double> thresholds);

/// Flanking sites of a wall at half a lattice spacing on each side.
std::pair<double, double> wall_flanks(const Kernel& kernel, double wall);

} // namespace coalesce
