#include "coalesce/sim.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>
#include <limits>
#include <queue>
#include <unordered_map>

#include "coalesce/parallel.hpp"
#include "coalesce/rng.hpp"

namespace coalesce {

double SimulationConfig::observation_margin() const {
    return margin_sigmas * std::sqrt(2.0 * horizon);
}

void SimulationConfig::validate() const {
    if (replicates < 1) throw DomainError("simulation: replicates must be >= 1");
    if (horizon < 0.0) throw DomainError("simulation: horizon must be >= 0");
    if (!(window_halfwidth > 0.0)) throw DomainError("simulation: window must be > 0");
    if (window_halfwidth <= observation_margin())
        throw DomainError("simulation: window too small for the observation margin");
    switch (model) {
        case SimModel::ParityWalk: {
            if (occupancy == Occupancy::AllSites)
                throw DomainError("parity walk: occupying both parities lets particles cross "
                                  "without meeting; occupy a single sublattice");
            if (sublattice_parity != 0 && sublattice_parity != 1)
                throw DomainError("parity walk: parity must be 0 or 1");
            if (std::abs(horizon - std::round(horizon)) > 1e-9)
                throw DomainError("parity walk: horizon must be an integer step count");
            break;
        }
        case SimModel::CtSimpleWalk:
            if (occupancy == Occupancy::Sublattice)
                throw DomainError("ct walk: sublattice occupancy not meaningful");
            break;
        case SimModel::BrownianFineLattice:
            if (!(lattice_spacing > 0.0))
                throw DomainError("fine lattice: spacing must be > 0");
            if (occupancy != Occupancy::AllSites)
                throw DomainError("fine lattice: only all-sites occupancy is supported");
            break;
    }
    if (occupancy == Occupancy::ExplicitSites) {
        if (explicit_sites.empty()) throw DomainError("simulation: explicit site list is empty");
        for (std::size_t i = 1; i < explicit_sites.size(); ++i)
            if (!(explicit_sites[i] > explicit_sites[i - 1]))
                throw DomainError("simulation: explicit sites must be strictly increasing");
    }
}

namespace {

struct EngineOut {
    std::vector<long> pos, left, right; // site units
};

// Synchronous +/-1 steps; all clusters share one parity, so equal-position
// runs after a step have length at most 2.
EngineOut run_parity(std::vector<long> sites, long steps, Rng& rng) {
    EngineOut e{std::move(sites), {}, {}};
    e.left = e.pos;
    e.right = e.pos;
    std::vector<long> npos, nleft, nright;
    for (long s = 0; s < steps; ++s) {
        for (auto& p : e.pos) p += rng.coin() ? 1 : -1;
        npos.clear();
        nleft.clear();
        nright.clear();
        for (std::size_t i = 0; i < e.pos.size();) {
            if (i + 1 < e.pos.size() && e.pos[i + 1] == e.pos[i]) {
                npos.push_back(e.pos[i]);
                nleft.push_back(e.left[i]);
                nright.push_back(e.right[i + 1]);
                i += 2;
            } else {
                npos.push_back(e.pos[i]);
                nleft.push_back(e.left[i]);
                nright.push_back(e.right[i]);
                ++i;
            }
        }
        e.pos.swap(npos);
        e.left.swap(nleft);
        e.right.swap(nright);
        assert(std::is_sorted(e.pos.begin(), e.pos.end()));
    }
    return e;
}

// Event-driven continuous-time walk: each cluster jumps one site left or
// right, each direction at rate_per_dir. Lazy-deleted binary heap keyed by
// next jump time; merges redraw the survivor's clock (memoryless).
EngineOut run_ct(const std::vector<long>& sites, double rate_per_dir, double horizon, Rng& rng) {
    const long n = static_cast<long>(sites.size());
    std::vector<long> pos(sites), left(sites), right(sites);
    std::vector<long> prev(static_cast<std::size_t>(n)), next(static_cast<std::size_t>(n));
    std::vector<unsigned> gen(static_cast<std::size_t>(n), 0);
    std::vector<char> alive(static_cast<std::size_t>(n), 1);

    struct Ev {
        double t;
        long id;
        unsigned gen;
    };
    auto later = [](const Ev& a, const Ev& b) { return a.t > b.t; };
    std::priority_queue<Ev, std::vector<Ev>, decltype(later)> heap(later);

    const double total_rate = 2.0 * rate_per_dir;
    for (long i = 0; i < n; ++i) {
        prev[static_cast<std::size_t>(i)] = i - 1;
        next[static_cast<std::size_t>(i)] = i + 1 < n ? i + 1 : -1;
        heap.push({rng.exponential(total_rate), i, 0});
    }

    while (!heap.empty() && heap.top().t <= horizon) {
        Ev ev = heap.top();
        heap.pop();
        long id = ev.id;
        if (!alive[static_cast<std::size_t>(id)] || ev.gen != gen[static_cast<std::size_t>(id)])
            continue;
        bool to_right = rng.coin();
        pos[static_cast<std::size_t>(id)] += to_right ? 1 : -1;
        long nb = to_right ? next[static_cast<std::size_t>(id)] : prev[static_cast<std::size_t>(id)];
        if (nb >= 0 && pos[static_cast<std::size_t>(nb)] == pos[static_cast<std::size_t>(id)]) {
            left[static_cast<std::size_t>(id)] = std::min(left[static_cast<std::size_t>(id)],
                                                          left[static_cast<std::size_t>(nb)]);
            right[static_cast<std::size_t>(id)] = std::max(right[static_cast<std::size_t>(id)],
                                                           right[static_cast<std::size_t>(nb)]);
            alive[static_cast<std::size_t>(nb)] = 0;
            ++gen[static_cast<std::size_t>(nb)];
            if (to_right) {
                long nx = next[static_cast<std::size_t>(nb)];
                next[static_cast<std::size_t>(id)] = nx;
                if (nx >= 0) prev[static_cast<std::size_t>(nx)] = id;
            } else {
                long pv = prev[static_cast<std::size_t>(nb)];
                prev[static_cast<std::size_t>(id)] = pv;
                if (pv >= 0) next[static_cast<std::size_t>(pv)] = id;
            }
        }
        ++gen[static_cast<std::size_t>(id)];
        heap.push({ev.t + rng.exponential(total_rate), id, gen[static_cast<std::size_t>(id)]});
    }

    EngineOut e;
    for (long i = 0; i < n; ++i) {
        if (!alive[static_cast<std::size_t>(i)]) continue;
        e.pos.push_back(pos[static_cast<std::size_t>(i)]);
        e.left.push_back(left[static_cast<std::size_t>(i)]);
        e.right.push_back(right[static_cast<std::size_t>(i)]);
    }
    assert(std::is_sorted(e.pos.begin(), e.pos.end()));
    return e;
}

std::vector<long> initial_sites(const SimulationConfig& cfg) {
    std::vector<long> sites;
    auto explicit_longs = [&] {
        for (double s : cfg.explicit_sites) {
            long v = std::lround(s);
            if (std::abs(s - static_cast<double>(v)) > 1e-9)
                throw DomainError("simulation: explicit sites must be integers");
            sites.push_back(v);
        }
    };
    switch (cfg.model) {
        case SimModel::ParityWalk: {
            if (cfg.occupancy == Occupancy::ExplicitSites) {
                explicit_longs();
                for (long s : sites)
                    if (((s % 2) + 2) % 2 != cfg.sublattice_parity)
                        throw DomainError("parity walk: explicit sites off the sublattice");
            } else {
                long w = static_cast<long>(std::floor(cfg.window_halfwidth));
                long lo = -w;
                if ((((lo % 2) + 2) % 2) != cfg.sublattice_parity) ++lo;
                for (long s = lo; s <= w; s += 2) sites.push_back(s);
            }
            break;
        }
        case SimModel::CtSimpleWalk: {
            if (cfg.occupancy == Occupancy::ExplicitSites) {
                explicit_longs();
            } else {
                long w = static_cast<long>(std::floor(cfg.window_halfwidth));
                for (long s = -w; s <= w; ++s) sites.push_back(s);
            }
            break;
        }
        case SimModel::BrownianFineLattice: {
            long w = static_cast<long>(std::floor(cfg.window_halfwidth / cfg.lattice_spacing));
            for (long s = -w; s <= w; ++s) sites.push_back(s);
            break;
        }
    }
    if (sites.empty()) throw DomainError("simulation: no initial sites in window");
    return sites;
}

SurvivorConfiguration to_configuration(const EngineOut& e, double to_real, double obs_lo,
                                       double obs_hi) {
    SurvivorConfiguration out;
    std::size_t n = e.pos.size();
    out.survivors.reserve(n);
    out.basins.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.survivors.push_back(static_cast<double>(e.pos[i]) * to_real);
        out.basins.emplace_back(static_cast<double>(e.left[i]) * to_real,
                                static_cast<double>(e.right[i]) * to_real);
        if (i + 1 < n) {
            assert(e.right[i] < e.left[i + 1]);
            out.walls.push_back(0.5 * static_cast<double>(e.right[i] + e.left[i + 1]) * to_real);
        }
    }
    out.obs_lo = obs_lo;
    out.obs_hi = obs_hi;
    return out;
}

SurvivorConfiguration run_replicate(const SimulationConfig& cfg, const std::vector<long>& sites,
                                    long replicate) {
    Rng rng = replicate_stream(cfg.seed, static_cast<std::uint64_t>(replicate));
    double margin = cfg.observation_margin();
    double obs_lo = -cfg.window_halfwidth + margin;
    double obs_hi = cfg.window_halfwidth - margin;
    switch (cfg.model) {
        case SimModel::ParityWalk: {
            EngineOut e = run_parity(sites, std::lround(cfg.horizon), rng);
            return to_configuration(e, 1.0, obs_lo, obs_hi);
        }
        case SimModel::CtSimpleWalk: {
            EngineOut e = run_ct(sites, 1.0, cfg.horizon, rng);
            return to_configuration(e, 1.0, obs_lo, obs_hi);
        }
        case SimModel::BrownianFineLattice: {
            double eps = cfg.lattice_spacing;
            EngineOut e = run_ct(sites, 1.0 / (2.0 * eps * eps), cfg.horizon, rng);
            return to_configuration(e, eps, obs_lo, obs_hi);
        }
    }
    throw DomainError("simulation: unknown model");
}

} // namespace

void simulate(const SimulationConfig& config, const ReplicateSink& sink) {
    config.validate();
    std::vector<long> sites = initial_sites(config);
    const long block = std::max<long>(1, 4L * static_cast<long>(thread_count()));
    for (long base = 0; base < config.replicates; base += block) {
        long count = std::min(block, config.replicates - base);
        auto results = parallel_map<SurvivorConfiguration>(count, [&](long i) {
            return run_replicate(config, sites, base + i);
        });
        for (long i = 0; i < count; ++i) sink(base + i, results[static_cast<std::size_t>(i)]);
    }
}

std::vector<double> extract_gaps(const SurvivorConfiguration& config) {
    std::vector<double> gaps;
    for (std::size_t i = 0; i + 1 < config.survivors.size(); ++i) {
        double a = config.survivors[i];
        double b = config.survivors[i + 1];
        if (a >= config.obs_lo && b <= config.obs_hi) gaps.push_back(b - a);
    }
    return gaps;
}

std::vector<double> extract_wall_gaps(const SurvivorConfiguration& config) {
    std::vector<double> gaps;
    for (std::size_t i = 0; i + 1 < config.walls.size(); ++i) {
        double a = config.walls[i];
        double b = config.walls[i + 1];
        if (a >= config.obs_lo && b <= config.obs_hi) gaps.push_back(b - a);
    }
    return gaps;
}

namespace {

long bin_index(double gap, const GapStatisticsConfig& c) {
    if (c.discrete_bins) return std::lround(gap / c.bin_width) - 1;
    return static_cast<long>(std::floor(gap / c.bin_width));
}

void tally(const std::vector<double>& gaps, const GapStatisticsConfig& c,
           std::vector<RunningStat>& frac) {
    std::vector<double> counts(static_cast<std::size_t>(c.bins), 0.0);
    for (double g : gaps) {
        long b = bin_index(g, c);
        if (b >= 0 && b < c.bins) counts[static_cast<std::size_t>(b)] += 1.0;
    }
    double denom = static_cast<double>(gaps.size());
    for (long b = 0; b < c.bins; ++b)
        frac[static_cast<std::size_t>(b)].add(denom > 0 ? counts[static_cast<std::size_t>(b)] / denom
                                                        : 0.0);
}

} // namespace

void GapStatistics::add(const SurvivorConfiguration& cfg, bool per_site, double spacing) {
    if (gap_frac.empty()) {
        gap_frac.resize(static_cast<std::size_t>(config.bins));
        wall_gap_frac.resize(static_cast<std::size_t>(config.bins));
    }
    ++replicates;

    long in_window = 0;
    for (double s : cfg.survivors)
        if (s >= cfg.obs_lo && s <= cfg.obs_hi) ++in_window;
    double measure;
    if (per_site) {
        // exact count of lattice sites inside the window
        measure = std::floor(cfg.obs_hi / spacing) - std::ceil(cfg.obs_lo / spacing) + 1.0;
    } else {
        measure = cfg.obs_hi - cfg.obs_lo;
    }
    density.add(static_cast<double>(in_window) / measure);

    std::vector<double> gaps = extract_gaps(cfg);
    total_gaps += static_cast<double>(gaps.size());
    tally(gaps, config, gap_frac);

    std::vector<double> wgaps = extract_wall_gaps(cfg);
    total_wall_gaps += static_cast<double>(wgaps.size());
    tally(wgaps, config, wall_gap_frac);

    // adjacent-pair correlation within the replicate
    if (gaps.size() >= 9) {
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        double n = static_cast<double>(gaps.size() - 1);
        for (std::size_t i = 0; i + 1 < gaps.size(); ++i) {
            double x = gaps[i], y = gaps[i + 1];
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
        }
        double vx = sxx / n - (sx / n) * (sx / n);
        double vy = syy / n - (sy / n) * (sy / n);
        if (vx > 0 && vy > 0) rho.add((sxy / n - (sx / n) * (sy / n)) / std::sqrt(vx * vy));
    }

    if (config.pair_box_hi > config.pair_box_lo && gaps.size() >= 2) {
        double inside = 0.0;
        for (std::size_t i = 0; i + 1 < gaps.size(); ++i) {
            bool in1 = gaps[i] >= config.pair_box_lo && gaps[i] < config.pair_box_hi;
            bool in2 = gaps[i + 1] >= config.pair_box_lo && gaps[i + 1] < config.pair_box_hi;
            if (in1 && in2) inside += 1.0;
        }
        pair_box_frac.add(inside / static_cast<double>(gaps.size() - 1));
    }
}

GapStatistics collect_gap_statistics(const SimulationConfig& config,
                                     const GapStatisticsConfig& stats_config) {
    GapStatistics stats;
    stats.config = stats_config;
    bool per_site = config.model != SimModel::BrownianFineLattice;
    double spacing = config.model == SimModel::ParityWalk ? 2.0 : 1.0;
    // survivor site counting needs only the spacing; the sublattice offset
    // shifts the in-window count by at most one site
    simulate(config, [&](long, const SurvivorConfiguration& c) {
        stats.add(c, per_site, spacing);
    });
    return stats;
}

WarrenEstimate empirical_warren_cdf(SimModel model, double horizon,
                                    std::span<const double> starts,
                                    std::span<const double> thresholds,
                                    long replicates, std::uint64_t seed,
                                    int sublattice_parity) {
    if (starts.empty() || starts.size() != thresholds.size())
        throw DomainError("empirical_warren_cdf: starts/thresholds mismatch");
    if (model == SimModel::BrownianFineLattice)
        throw DomainError("empirical_warren_cdf: discrete models only");
    std::vector<long> sites;
    for (double s : starts) {
        long v = std::lround(s);
        if (std::abs(s - static_cast<double>(v)) > 1e-9)
            throw DomainError("empirical_warren_cdf: starts must be integer sites");
        if (model == SimModel::ParityWalk && (((v % 2) + 2) % 2) != sublattice_parity)
            throw DomainError("empirical_warren_cdf: starts off the sublattice");
        sites.push_back(v);
    }
    long steps = std::lround(horizon);

    auto worker = [&](long rep) -> double {
        Rng rng = replicate_stream(seed, static_cast<std::uint64_t>(rep));
        EngineOut e = model == SimModel::ParityWalk ? run_parity(sites, steps, rng)
                                                    : run_ct(sites, 1.0, horizon, rng);
        // Z(x_i): final position of the cluster whose ancestry interval
        // contains x_i
        std::size_t c = 0;
        for (std::size_t i = 0; i < sites.size(); ++i) {
            while (e.right[c] < sites[i]) ++c;
            if (static_cast<double>(e.pos[c]) > thresholds[i]) return 0.0;
        }
        return 1.0;
    };
    auto hits = parallel_map<double>(replicates, worker);
    double sum = 0.0;
    for (double h : hits) sum += h;
    WarrenEstimate est;
    est.replicates = replicates;
    est.p_hat = sum / static_cast<double>(replicates);
    est.se = std::sqrt(std::max(0.0, est.p_hat * (1.0 - est.p_hat) /
                                          static_cast<double>(replicates)));
    return est;
}

// --- exact cluster-state dynamic programming -------------------------------

namespace dp {

namespace {

struct Cluster {
    std::int16_t pos, left, right;
    bool operator==(const Cluster&) const = default;
};
using State = std::vector<Cluster>;

struct StateHash {
    std::size_t operator()(const State& s) const {
        std::size_t h = 1469598103934665603ull;
        for (const Cluster& c : s) {
            auto mix = [&h](std::int16_t v) {
                h ^= static_cast<std::size_t>(static_cast<std::uint16_t>(v));
                h *= 1099511628211ull;
            };
            mix(c.pos);
            mix(c.left);
            mix(c.right);
        }
        return h;
    }
};

using Dist = std::unordered_map<State, double, StateHash>;

constexpr std::size_t kMaxTransitions = 200'000'000;

Dist evolve(const std::vector<long>& starts, long steps) {
    if (starts.size() > 24) throw DomainError("dp oracle: too many particles");
    if (steps < 0 || steps > 8) throw DomainError("dp oracle: steps out of range");
    for (std::size_t i = 1; i < starts.size(); ++i) {
        if (starts[i] <= starts[i - 1]) throw DomainError("dp oracle: starts not increasing");
        if (((starts[i] - starts[0]) % 2) != 0)
            throw DomainError("dp oracle: starts must share one parity");
    }
    State init;
    for (long s : starts) {
        auto v = static_cast<std::int16_t>(s);
        init.push_back({v, v, v});
    }
    Dist cur;
    cur.emplace(std::move(init), 1.0);

    std::size_t transitions = 0;
    State moved;
    for (long step = 0; step < steps; ++step) {
        Dist next;
        next.reserve(cur.size() * 4);
        for (const auto& [state, prob] : cur) {
            const unsigned c = static_cast<unsigned>(state.size());
            const double pmove = std::ldexp(prob, -static_cast<int>(c));
            transitions += (1u << c);
            if (transitions > kMaxTransitions)
                throw DomainError("dp oracle: state-space blowup beyond limits");
            for (unsigned mask = 0; mask < (1u << c); ++mask) {
                moved.clear();
                for (unsigned i = 0; i < c; ++i) {
                    Cluster cl = state[i];
                    cl.pos = static_cast<std::int16_t>(cl.pos + ((mask >> i) & 1u ? 1 : -1));
                    // same parity everywhere: equal-position runs are pairs
                    if (!moved.empty() && moved.back().pos == cl.pos)
                        moved.back().right = cl.right;
                    else
                        moved.push_back(cl);
                }
                next[moved] += pmove;
            }
        }
        cur = std::move(next);
    }
    return cur;
}

// occupied window around the flanking sites; a particle more than `steps`
// sublattice sites away cannot reach any flank within `steps` steps
std::vector<long> occupied_window(long lo_flank, long hi_flank, long steps, long margin_sites) {
    if (margin_sites < 0) margin_sites = steps;
    long margin = 2 * margin_sites;
    std::vector<long> sites;
    for (long s = lo_flank - margin; s <= hi_flank + margin; s += 2) sites.push_back(s);
    return sites;
}

bool contains_pattern(const State& state, std::span<const long> walls,
                      std::span<const long> survivors) {
    std::size_t k1 = survivors.size();
    if (state.size() < k1) return false;
    for (std::size_t j = 0; j + k1 <= state.size(); ++j) {
        bool ok = true;
        for (std::size_t l = 0; l < k1 && ok; ++l)
            ok = state[j + l].pos == survivors[l];
        for (std::size_t l = 0; l + 1 < k1 && ok; ++l)
            ok = state[j + l].right + state[j + l + 1].left == 2 * walls[l];
        if (ok) return true;
    }
    return false;
}

} // namespace

double coalescence_probability(std::span<const long> starts, long steps,
                               const CoalescencePattern& pattern,
                               std::span<const long> survivors) {
    if (static_cast<long>(starts.size()) != pattern.n())
        throw DomainError("dp coalescence: starts/pattern mismatch");
    if (static_cast<long>(survivors.size()) != pattern.k())
        throw DomainError("dp coalescence: survivors/pattern mismatch");
    Dist dist = evolve(std::vector<long>(starts.begin(), starts.end()), steps);
    double total = 0.0;
    for (const auto& [state, prob] : dist) {
        if (static_cast<long>(state.size()) != pattern.k()) continue;
        bool match = true;
        for (long l = 0; l < pattern.k() && match; ++l) {
            const Cluster& c = state[static_cast<std::size_t>(l)];
            long first = pattern.first_index(l);
            long last = first + pattern.parts()[static_cast<std::size_t>(l)] - 1;
            match = c.pos == survivors[static_cast<std::size_t>(l)] &&
                    c.left == starts[static_cast<std::size_t>(first)] &&
                    c.right == starts[static_cast<std::size_t>(last)];
        }
        if (match) total += prob;
    }
    return total;
}

double warren_cdf(std::span<const long> starts, long steps, std::span<const double> thresholds) {
    if (starts.size() != thresholds.size())
        throw DomainError("dp warren: starts/thresholds mismatch");
    Dist dist = evolve(std::vector<long>(starts.begin(), starts.end()), steps);
    double total = 0.0;
    for (const auto& [state, prob] : dist) {
        bool ok = true;
        std::size_t c = 0;
        for (std::size_t i = 0; i < starts.size() && ok; ++i) {
            while (state[c].right < starts[i]) ++c;
            ok = static_cast<double>(state[c].pos) <= thresholds[i];
        }
        if (ok) total += prob;
    }
    return total;
}

double wall_particle_probability(std::span<const long> walls, std::span<const long> survivors,
                                 long steps, long margin_sites) {
    if (walls.empty() || survivors.size() != walls.size() + 1)
        throw DomainError("dp wall-particle: need count(walls)+1 survivors");
    long lo = walls.front() - 1;
    long hi = walls.back() + 1;
    Dist dist = evolve(occupied_window(lo, hi, steps, margin_sites), steps);
    double total = 0.0;
    for (const auto& [state, prob] : dist)
        if (contains_pattern(state, walls, survivors)) total += prob;
    return total;
}

double multi_pattern_probability(std::span<const PatternSpec> patterns, long steps,
                                 long margin_sites) {
    if (patterns.empty()) throw DomainError("dp multi-pattern: no patterns");
    long lo = patterns.front().walls.front() - 1;
    long hi = patterns.back().walls.back() + 1;
    Dist dist = evolve(occupied_window(lo, hi, steps, margin_sites), steps);
    double total = 0.0;
    for (const auto& [state, prob] : dist) {
        bool all = true;
        for (const auto& p : patterns)
            if (!contains_pattern(state, p.walls, p.survivors)) {
                all = false;
                break;
            }
        if (all) total += prob;
    }
    return total;
}

} // namespace dp

} // namespace coalesce
