#include "coalesce/detcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coalesce {

namespace {

constexpr double kClampTol = 1e-12;

bool strictly_increasing(std::span<const double> v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) return false;
    return true;
}

long as_site(double v, const char* what) {
    long s = std::lround(v);
    if (std::abs(v - static_cast<double>(s)) > 1e-9)
        throw DomainError(std::string(what) + ": expected an integer site");
    return s;
}

} // namespace

CoalescencePattern::CoalescencePattern(std::vector<long> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw DomainError("coalescence pattern: empty composition");
    prefix_.reserve(parts_.size() + 1);
    prefix_.push_back(0);
    for (long p : parts_) {
        if (p < 1) throw DomainError("coalescence pattern: parts must be >= 1");
        n_ += p;
        prefix_.push_back(n_);
    }
}

long CoalescencePattern::block_of(long j) const {
    for (std::size_t l = 0; l + 1 < prefix_.size(); ++l)
        if (j < prefix_[l + 1]) return static_cast<long>(l);
    throw DomainError("block_of: column out of range");
}

WallParticlePattern::WallParticlePattern(std::vector<double> walls_in,
                                         std::vector<double> survivors_in)
    : walls(std::move(walls_in)), survivors(std::move(survivors_in)) {
    if (walls.empty()) throw DomainError("wall-particle pattern: need at least one wall");
    if (survivors.size() != walls.size() + 1)
        throw DomainError("wall-particle pattern: need count(walls)+1 survivors");
    if (!strictly_increasing(walls)) throw DomainError("wall-particle pattern: walls not increasing");
    if (!strictly_increasing(survivors))
        throw DomainError("wall-particle pattern: survivors not increasing");
}

double determinant(const SquareMatrix& m) {
    long n = m.order();
    if (n < 1) throw DomainError("determinant: empty matrix");
    std::vector<double> a(static_cast<std::size_t>(n * n));
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) {
            double v = m.at(i, j);
            if (!std::isfinite(v)) throw DomainError("determinant: non-finite entry");
            a[static_cast<std::size_t>(i * n + j)] = v;
        }
    double det = 1.0;
    for (long c = 0; c < n; ++c) {
        long pivot = c;
        double best = std::abs(a[static_cast<std::size_t>(c * n + c)]);
        for (long r = c + 1; r < n; ++r) {
            double v = std::abs(a[static_cast<std::size_t>(r * n + c)]);
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best == 0.0) return 0.0;
        if (pivot != c) {
            for (long j = 0; j < n; ++j)
                std::swap(a[static_cast<std::size_t>(c * n + j)],
                          a[static_cast<std::size_t>(pivot * n + j)]);
            det = -det;
        }
        double d = a[static_cast<std::size_t>(c * n + c)];
        det *= d;
        for (long r = c + 1; r < n; ++r) {
            double f = a[static_cast<std::size_t>(r * n + c)] / d;
            if (f == 0.0) continue;
            for (long j = c; j < n; ++j)
                a[static_cast<std::size_t>(r * n + j)] -= f * a[static_cast<std::size_t>(c * n + j)];
        }
    }
    return det;
}

SquareMatrix coalescence_matrix(const Kernel& kernel,
                                std::span<const double> starts,
                                const CoalescencePattern& pattern,
                                std::span<const double> survivors) {
    long n = pattern.n();
    if (static_cast<long>(starts.size()) != n)
        throw DomainError("coalescence_matrix: starts/pattern length mismatch");
    if (static_cast<long>(survivors.size()) != pattern.k())
        throw DomainError("coalescence_matrix: survivors/pattern length mismatch");
    if (!strictly_increasing(starts)) throw DomainError("coalescence_matrix: starts not increasing");
    if (!strictly_increasing(survivors))
        throw DomainError("coalescence_matrix: survivors not increasing");

    SquareMatrix m(n);
    for (long j = 0; j < n; ++j) {
        long l = pattern.block_of(j);
        double y = survivors[static_cast<std::size_t>(l)];
        bool first = (j == pattern.first_index(l));
        for (long i = 0; i < n; ++i) {
            double x = starts[static_cast<std::size_t>(i)];
            m.at(i, j) = first ? kernel.weight(x, y)
                               : kernel.cum(x, y) - (i < j ? 1.0 : 0.0);
        }
    }
    return m;
}

ProbResult coalescence_probability(const Kernel& kernel,
                                   std::span<const double> starts,
                                   const CoalescencePattern& pattern,
                                   std::span<const double> survivors) {
    if (kernel.state_kind() == StateKind::Discrete) {
        // parity / reach screening before any matrix is built
        for (long l = 0; l < pattern.k(); ++l) {
            long y = as_site(survivors[static_cast<std::size_t>(l)], "survivor");
            bool reach = false;
            for (long j = pattern.first_index(l); j < pattern.first_index(l + 1); ++j) {
                long x = as_site(starts[static_cast<std::size_t>(j)], "start");
                if (!kernel.admissible_target(x, y)) return {0.0, false, false};
                if (kernel.reachable(x, y)) reach = true;
            }
            if (!reach) return {0.0, false, false};
        }
    }
    double det = determinant(coalescence_matrix(kernel, starts, pattern, survivors));
    ProbResult r{det, false, false};
    if (det < 0.0) {
        if (det < -kClampTol)
            throw DomainError("coalescence_probability: determinant below -1e-12 "
                              "(inadmissible inputs or kernel bug)");
        r.value = 0.0;
        r.clamped = true;
    }
    return r;
}

std::pair<double, double> wall_flanks(const Kernel& kernel, double wall) {
    double half = static_cast<double>(kernel.lattice_spacing()) / 2.0;
    double a = wall - half;
    double b = wall + half;
    as_site(a, "wall flank");
    as_site(b, "wall flank");
    return {a, b};
}

namespace {

// 1 + 2 + ... + 2 + 1 with k+1 parts (k >= 1); for k = 1 this is 1+1.
CoalescencePattern zigzag_composition(long k) {
    std::vector<long> parts;
    parts.push_back(1);
    for (long l = 1; l < k; ++l) parts.push_back(2);
    parts.push_back(1);
    return CoalescencePattern(std::move(parts));
}

} // namespace

SquareMatrix wall_particle_matrix(const Kernel& kernel, const WallParticlePattern& pattern) {
    if (kernel.state_kind() != StateKind::Discrete)
        throw DomainError("wall_particle_matrix: discrete kernel required");
    std::vector<double> starts;
    starts.reserve(2 * pattern.walls.size());
    for (double w : pattern.walls) {
        auto [a, b] = wall_flanks(kernel, w);
        starts.push_back(a);
        starts.push_back(b);
    }
    if (!strictly_increasing(starts))
        throw DomainError("wall_particle_matrix: walls too close (flanks collide)");
    return coalescence_matrix(kernel, starts, zigzag_composition(pattern.k()), pattern.survivors);
}

SquareMatrix multi_pattern_matrix(const Kernel& kernel,
                                  std::span<const WallParticlePattern> patterns) {
    if (patterns.empty()) throw DomainError("multi_pattern_matrix: no patterns");
    if (kernel.state_kind() != StateKind::Discrete)
        throw DomainError("multi_pattern_matrix: discrete kernel required");
    std::vector<double> starts;
    std::vector<double> survivors;
    std::vector<long> parts;
    for (const auto& p : patterns) {
        for (double w : p.walls) {
            auto [a, b] = wall_flanks(kernel, w);
            starts.push_back(a);
            starts.push_back(b);
        }
        parts.push_back(1);
        for (long l = 1; l < p.k(); ++l) parts.push_back(2);
        parts.push_back(1);
        survivors.insert(survivors.end(), p.survivors.begin(), p.survivors.end());
    }
    if (!strictly_increasing(starts) || !strictly_increasing(survivors))
        throw DomainError("multi_pattern_matrix: patterns overlap");
    return coalescence_matrix(kernel, starts, CoalescencePattern(std::move(parts)), survivors);
}

SquareMatrix brownian_m0(const WallParticlePattern& pattern, double horizon) {
    Kernel g = Kernel::gaussian(horizon);
    long k = pattern.k();
    SquareMatrix m(2 * k);
    // columns: P(y_0) | P(y_l), F(y_l) for l = 1..k-1 | P(y_k)
    for (long w = 0; w < k; ++w) {
        double x = pattern.walls[static_cast<std::size_t>(w)];
        long rd = 2 * w;     // density row
        long rs = 2 * w + 1; // source-derivative row
        auto emit = [&](long col, double y, bool is_cum, bool shift) {
            if (is_cum) {
                m.at(rd, col) = g.cdf(x, y) - (shift ? 1.0 : 0.0);
                m.at(rs, col) = g.d_source_cdf(x, y);
            } else {
                m.at(rd, col) = g.density(x, y);
                m.at(rs, col) = g.d_source_density(x, y);
            }
        };
        emit(0, pattern.survivors[0], false, false);
        for (long l = 1; l < k; ++l) {
            double y = pattern.survivors[static_cast<std::size_t>(l)];
            emit(2 * l - 1, y, false, false);
            emit(2 * l, y, true, /*shift: wall row-pair above the block of y_l*/ w < l);
        }
        emit(2 * k - 1, pattern.survivors[static_cast<std::size_t>(k)], false, false);
    }
    return m;
}

SquareMatrix halfline_m0(const WallParticlePattern& pattern, double horizon) {
    for (double w : pattern.walls)
        if (!(w > 0.0)) throw DomainError("halfline_m0: walls must be > 0");
    if (!(pattern.survivors.front() > 0.0))
        throw DomainError("halfline_m0: survivors must be > 0");
    Kernel g = Kernel::reflected_gaussian(horizon);
    long k = pattern.k();
    SquareMatrix m(2 * k + 1);
    // columns: P(y_l), F(y_l) for l = 0..k-1 | P(y_k)
    auto pcol = [&](long l) { return l < k ? 2 * l : 2 * k; };
    // boundary row: particle at 0; every F column sits right of column 0, so
    // the row-level staircase puts -1 in each of them
    for (long l = 0; l <= k; ++l)
        m.at(0, pcol(l)) = g.density(0.0, pattern.survivors[static_cast<std::size_t>(l)]);
    for (long l = 0; l < k; ++l)
        m.at(0, 2 * l + 1) = g.cdf(0.0, pattern.survivors[static_cast<std::size_t>(l)]) - 1.0;

    for (long w = 0; w < k; ++w) {
        double x = pattern.walls[static_cast<std::size_t>(w)];
        long rd = 1 + 2 * w;
        long rs = 2 + 2 * w;
        for (long l = 0; l <= k; ++l) {
            double y = pattern.survivors[static_cast<std::size_t>(l)];
            m.at(rd, pcol(l)) = g.density(x, y);
            m.at(rs, pcol(l)) = g.d_source_density(x, y);
        }
        for (long l = 0; l < k; ++l) {
            double y = pattern.survivors[static_cast<std::size_t>(l)];
            m.at(rd, 2 * l + 1) = g.cdf(x, y) - (w < l ? 1.0 : 0.0);
            m.at(rs, 2 * l + 1) = g.d_source_cdf(x, y);
        }
    }
    return m;
}

SquareMatrix warren_matrix(const Kernel& kernel,
                           std::span<const double> starts,
                           std::span<const double> thresholds) {
    long n = static_cast<long>(starts.size());
    if (n < 1) throw DomainError("warren_matrix: empty system");
    if (static_cast<long>(thresholds.size()) != n)
        throw DomainError("warren_matrix: starts/thresholds length mismatch");
    if (!strictly_increasing(starts)) throw DomainError("warren_matrix: starts not increasing");
    for (std::size_t i = 1; i < thresholds.size(); ++i)
        if (thresholds[i] < thresholds[i - 1])
            throw DomainError("warren_matrix: thresholds must be nondecreasing");

    SquareMatrix m(n);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j)
            m.at(i, j) = kernel.cum(starts[static_cast<std::size_t>(i)],
                                    thresholds[static_cast<std::size_t>(j)]) -
                         (i < j ? 1.0 : 0.0);
    return m;
}

ProbResult warren_cdf(const Kernel& kernel,
                      std::span<const double> starts,
                      std::span<const double> thresholds) {
    double det = determinant(warren_matrix(kernel, starts, thresholds));
    ProbResult r{det, false, false};
    if (det < 0.0) {
        r.value = 0.0;
        r.clamped = true;
        r.flagged = det < -kClampTol;
    } else if (det > 1.0) {
        r.value = 1.0;
        r.clamped = true;
        r.flagged = det > 1.0 + kClampTol;
    }
    return r;
}

} // namespace coalesce
