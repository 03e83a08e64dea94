#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "coalesce/detcore.hpp"
#include "coalesce/errors.hpp"

namespace coalesce {

enum class SimModel { ParityWalk, CtSimpleWalk, BrownianFineLattice };
enum class Occupancy { AllSites, Sublattice, ExplicitSites };

struct SimulationConfig {
    SimModel model = SimModel::CtSimpleWalk;
    double horizon = 1.0;
    /// Half-width of the initially occupied window, in sites (discrete
    /// models) or length units (fine lattice).
    double window_halfwidth = 256.0;
    /// Observation margin trimmed from each side: margin_sigmas * sqrt(2T).
    double margin_sigmas = 6.0;
    double lattice_spacing = 0.01; ///< fine lattice only
    long replicates = 1;
    std::uint64_t seed = 0;
    Occupancy occupancy = Occupancy::AllSites;
    int sublattice_parity = 0; ///< parity walk
    std::vector<double> explicit_sites;

    void validate() const;
    double observation_margin() const;
};

/// One replicate at the horizon: survivor positions, the walls between their
/// basins, and the basin intervals of initial positions.
struct SurvivorConfiguration {
    std::vector<double> survivors;
    std::vector<double> walls; ///< walls[i] separates survivors[i] and [i+1]
    std::vector<std::pair<double, double>> basins;
    double obs_lo = 0.0, obs_hi = 0.0;
};

using ReplicateSink = std::function<void(long, const SurvivorConfiguration&)>;

/// Runs all replicates; the sink is invoked in replicate order on a single
/// thread. Identical (config, seed) produce an identical stream regardless
/// of the thread count (per-replicate RNG streams split from the seed).
void simulate(const SimulationConfig& config, const ReplicateSink& sink);

/// Gaps between consecutive survivors with both endpoints inside the
/// observation window.
std::vector<double> extract_gaps(const SurvivorConfiguration& config);
/// Same for consecutive walls.
std::vector<double> extract_wall_gaps(const SurvivorConfiguration& config);

struct RunningStat {
    long n = 0;
    double mean = 0.0, m2 = 0.0;
    void add(double v) {
        ++n;
        double d = v - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (v - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double se() const { return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

struct GapStatisticsConfig {
    double bin_width = 1.0;
    long bins = 64;
    bool discrete_bins = true; ///< bins at exact multiples of bin_width
    /// Optional 2D box for adjacent-pair frequency (lo, hi); disabled when
    /// hi <= lo.
    double pair_box_lo = 0.0, pair_box_hi = 0.0;
};

/// Per-replicate tallies aggregated across the stream: gap pmf, wall-gap
/// pmf, survivor density, adjacent-gap correlation. Standard errors come
/// from across-replicate variance.
struct GapStatistics {
    GapStatisticsConfig config;
    std::vector<RunningStat> gap_frac;
    std::vector<RunningStat> wall_gap_frac;
    RunningStat density; ///< survivors per site (discrete) or unit length
    RunningStat rho;     ///< per-replicate adjacent-gap correlation
    RunningStat pair_box_frac;
    long replicates = 0;
    double total_gaps = 0.0;
    double total_wall_gaps = 0.0;

    void add(const SurvivorConfiguration& cfg, bool per_site, double spacing);
};

GapStatistics collect_gap_statistics(const SimulationConfig& config,
                                     const GapStatisticsConfig& stats_config);

struct WarrenEstimate {
    double p_hat = 0.0;
    double se = 0.0;
    long replicates = 0;
};

/// Monte Carlo frequency of the joint event Z_T(x_i) <= y_i for coalescing
/// particles from finitely many starts.
WarrenEstimate empirical_warren_cdf(SimModel model, double horizon,
                                    std::span<const double> starts,
                                    std::span<const double> thresholds,
                                    long replicates, std::uint64_t seed,
                                    int sublattice_parity = 0);

/// Exact cluster-state dynamic programming for small synchronous parity-walk
/// systems. Probabilities are dyadic rationals evaluated exactly in double
/// precision at these sizes.
namespace dp {

/// P(pattern realized exactly with survivors at the given positions).
double coalescence_probability(std::span<const long> starts, long steps,
                               const CoalescencePattern& pattern,
                               std::span<const long> survivors);

/// P(Z_steps(x_i) <= thresholds_i for all i); +inf thresholds accepted.
double warren_cdf(std::span<const long> starts, long steps,
                  std::span<const double> thresholds);

/// P(the wall-particle system contains the consecutive pattern) with every
/// sublattice site occupied in a window wide enough that outside particles
/// cannot influence the event. A particle at sublattice distance m from the
/// nearest flank can meet it within `steps` steps only if m <= steps, so the
/// default margin of `steps` sites is exhaustive; margin_sites overrides it
/// (insensitivity to the override is itself a checkable property).
double wall_particle_probability(std::span<const long> walls,
                                 std::span<const long> survivors, long steps,
                                 long margin_sites = -1);

struct PatternSpec {
    std::vector<long> walls;
    std::vector<long> survivors;
};

/// P(all separated patterns occur simultaneously), any number of survivors
/// between them.
double multi_pattern_probability(std::span<const PatternSpec> patterns, long steps,
                                 long margin_sites = -1);

} // namespace dp

} // namespace coalesce
