#include "coalesce/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coalesce {

namespace {

constexpr double kTailMass = 1e-16;

// Smallest K > lambda with Poisson(lambda) upper-tail Chernoff bound below
// kTailMass: P(N >= K) <= exp(K (1 + log(lambda/K)) - lambda).
long poisson_tail_radius(double lambda) {
    if (lambda <= 0.0) return 0;
    long k = static_cast<long>(std::ceil(lambda)) + 1;
    while (true) {
        double log_bound = static_cast<double>(k) * (1.0 + std::log(lambda / k)) - lambda;
        if (log_bound < std::log(kTailMass)) return k;
        ++k;
    }
}

double bessel_i_scaled_series(long n, double x) {
    // e^-x sum_m (x/2)^{2m+n} / (m! (m+n)!)
    double half = 0.5 * x;
    double term = std::exp(-x);
    for (long i = 1; i <= n; ++i) term *= half / static_cast<double>(i);
    if (term == 0.0) return 0.0;
    double sum = term;
    for (long m = 1; m < 400; ++m) {
        term *= half * half / (static_cast<double>(m) * static_cast<double>(m + n));
        sum += term;
        if (term < sum * 1e-18) break;
    }
    return sum;
}

// Downward Miller recurrence normalized by e^x = I_0 + 2 sum_{k>=1} I_k,
// which yields the scaled values directly. Fills out[n] = e^-x I_n(x)
// for n = 0..n_max. The start order must separate the I and K solutions by
// ~16 digits: K_n/I_n grows like exp(n^2/x), so (start^2 - n^2)/x >= 40.
void bessel_i_scaled_miller(double x, long n_max, std::vector<double>& out) {
    double separated = std::sqrt(static_cast<double>(n_max) * static_cast<double>(n_max) + 40.0 * x);
    long start = std::max(n_max + 20, static_cast<long>(std::ceil(separated)) + 20);
    out.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    double above = 0.0; // trial I_{k+1}
    double here = 1e-300;
    double norm = 0.0;
    for (long k = start; k >= 0; --k) {
        double below = above + (2.0 * static_cast<double>(k + 1) / x) * here;
        above = here;
        here = below;
        if (k <= n_max) out[static_cast<std::size_t>(k)] = here;
        norm += (k == 0) ? here : 2.0 * here;
        if (std::abs(here) > 1e280) {
            const double scale = 1e-280;
            here *= scale;
            above *= scale;
            norm *= scale;
            for (auto& v : out) v *= scale;
        }
    }
    for (auto& v : out) v /= norm;
}

} // namespace

double bessel_i_scaled(long n, double x) {
    if (n < 0) n = -n;
    if (x < 0.0) throw DomainError("bessel_i_scaled: negative argument");
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    if (x <= 30.0) return bessel_i_scaled_series(n, x);
    std::vector<double> table;
    bessel_i_scaled_miller(x, n, table);
    return table[static_cast<std::size_t>(n)];
}

double std_normal_pdf(double z) {
    return std::exp(-0.5 * z * z) * 0.3989422804014326779399461;
}

double std_normal_cdf(double z) {
    return 0.5 * std::erfc(-z * 0.7071067811865475244008444);
}

// --- construction ----------------------------------------------------------

Kernel Kernel::ct_simple_walk(double horizon) {
    if (!(horizon >= 0.0)) throw DomainError("ct_simple_walk: horizon must be >= 0");
    Kernel k;
    k.family_ = KernelFamily::CtSimpleWalk;
    k.horizon_ = horizon;
    k.build_ct_tables();
    return k;
}

Kernel Kernel::parity_walk(long steps, int occupied_parity) {
    if (steps < 0) throw DomainError("parity_walk: steps must be >= 0");
    if (occupied_parity != 0 && occupied_parity != 1)
        throw DomainError("parity_walk: parity must be 0 or 1");
    Kernel k;
    k.family_ = KernelFamily::ParityWalk;
    k.horizon_ = static_cast<double>(steps);
    k.steps_ = steps;
    k.parity_ = occupied_parity;
    k.build_parity_tables();
    return k;
}

Kernel Kernel::gaussian(double horizon) {
    if (!(horizon > 0.0)) throw DomainError("gaussian: horizon must be > 0");
    Kernel k;
    k.family_ = KernelFamily::Gaussian;
    k.horizon_ = horizon;
    return k;
}

Kernel Kernel::reflected_gaussian(double horizon) {
    if (!(horizon > 0.0)) throw DomainError("reflected_gaussian: horizon must be > 0");
    Kernel k;
    k.family_ = KernelFamily::ReflectedGaussian;
    k.horizon_ = horizon;
    return k;
}

Kernel Kernel::with_horizon(double t) const {
    switch (family_) {
        case KernelFamily::CtSimpleWalk: return ct_simple_walk(t);
        case KernelFamily::ParityWalk: {
            long s = std::lround(t);
            if (std::abs(t - static_cast<double>(s)) > 1e-9)
                throw DomainError("parity_walk horizon must be an integer step count");
            return parity_walk(s, parity_);
        }
        case KernelFamily::Gaussian: return gaussian(t);
        case KernelFamily::ReflectedGaussian: return reflected_gaussian(t);
    }
    throw DomainError("with_horizon: unknown family");
}

void Kernel::build_ct_tables() {
    double x = 2.0 * horizon_; // total jump rate 2, P(n) = e^-2t I_n(2t)
    tail_ = poisson_tail_radius(x) + 8;
    pmf_.assign(static_cast<std::size_t>(tail_) + 1, 0.0);
    if (x == 0.0) {
        pmf_[0] = 1.0;
    } else if (x <= 30.0) {
        for (long n = 0; n <= tail_; ++n)
            pmf_[static_cast<std::size_t>(n)] = bessel_i_scaled_series(n, x);
    } else {
        bessel_i_scaled_miller(x, tail_, pmf_);
    }
    // cumulative sums from the far tail inward; the remainder beyond tail_ is
    // below the 1e-16 stopping mass by construction
    suffix_.assign(pmf_.size() + 1, 0.0);
    for (long n = tail_; n >= 0; --n)
        suffix_[static_cast<std::size_t>(n)] =
            suffix_[static_cast<std::size_t>(n) + 1] + pmf_[static_cast<std::size_t>(n)];
}

void Kernel::build_parity_tables() {
    long t = steps_;
    binom_.assign(static_cast<std::size_t>(t) + 1, 0.0);
    if (t <= 1000) {
        // Pascal row scaled by 2^-t; exact dyadic arithmetic for t <= 50
        binom_[0] = std::pow(0.5, static_cast<double>(t));
        for (long j = 1; j <= t; ++j)
            binom_[static_cast<std::size_t>(j)] =
                binom_[static_cast<std::size_t>(j) - 1] *
                static_cast<double>(t - j + 1) / static_cast<double>(j);
    } else {
        for (long j = 0; j <= t; ++j) {
            double lg = std::lgamma(t + 1.0) - std::lgamma(j + 1.0) - std::lgamma(t - j + 1.0);
            binom_[static_cast<std::size_t>(j)] = std::exp(lg - t * std::log(2.0));
        }
    }
    prefix_.assign(binom_.size(), 0.0);
    double run = 0.0;
    for (std::size_t j = 0; j < binom_.size(); ++j) {
        run += binom_[j];
        prefix_[j] = run;
    }
}

// --- discrete ----------------------------------------------------------------

StateKind Kernel::state_kind() const {
    return (family_ == KernelFamily::CtSimpleWalk || family_ == KernelFamily::ParityWalk)
               ? StateKind::Discrete
               : StateKind::Continuous;
}

long Kernel::lattice_spacing() const {
    switch (family_) {
        case KernelFamily::CtSimpleWalk: return 1;
        case KernelFamily::ParityWalk: return 2;
        default: throw DomainError("lattice_spacing: continuous kernel");
    }
}

long Kernel::steps() const {
    if (family_ != KernelFamily::ParityWalk) throw DomainError("steps: not a parity walk");
    return steps_;
}

int Kernel::occupied_parity() const {
    if (family_ != KernelFamily::ParityWalk) throw DomainError("occupied_parity: not a parity walk");
    return parity_;
}

bool Kernel::admissible_target(long x, long y) const {
    switch (family_) {
        case KernelFamily::CtSimpleWalk: return true;
        case KernelFamily::ParityWalk: return ((y - x + steps_) % 2) == 0;
        default: throw DomainError("admissible_target: continuous kernel");
    }
}

bool Kernel::reachable(long x, long y) const {
    if (family_ == KernelFamily::ParityWalk)
        return admissible_target(x, y) && std::abs(y - x) <= steps_;
    return admissible_target(x, y);
}

long Kernel::tail_radius() const {
    switch (family_) {
        case KernelFamily::CtSimpleWalk: return tail_;
        case KernelFamily::ParityWalk: return steps_;
        default: throw DomainError("tail_radius: continuous kernel");
    }
}

double Kernel::point_prob(long x, long y) const {
    switch (family_) {
        case KernelFamily::CtSimpleWalk: {
            long d = std::abs(y - x);
            return d <= tail_ ? pmf_[static_cast<std::size_t>(d)] : 0.0;
        }
        case KernelFamily::ParityWalk: {
            long d = y - x;
            if (((d + steps_) % 2) != 0)
                throw DomainError("parity_walk point_prob: target off the reachable sublattice");
            if (std::abs(d) > steps_) return 0.0;
            return binom_[static_cast<std::size_t>((steps_ + d) / 2)];
        }
        default:
            throw DomainError("point_prob: continuous kernel");
    }
}

double Kernel::mass(long x, long y) const {
    if (family_ == KernelFamily::ParityWalk && !admissible_target(x, y)) return 0.0;
    return point_prob(x, y);
}

double Kernel::cumulative(long x, long y) const {
    switch (family_) {
        case KernelFamily::CtSimpleWalk: {
            long d = y - x;
            auto suffix = [&](long m) {
                return m <= tail_ ? suffix_[static_cast<std::size_t>(std::max<long>(m, 0))] : 0.0;
            };
            if (d >= 0) return 1.0 - suffix(d + 1);
            return suffix(-d);
        }
        case KernelFamily::ParityWalk: {
            // largest jump count j with x + (2j - steps) <= y
            long num = y - x + steps_;
            if (num < 0) return 0.0;
            long jmax = num / 2;
            if (jmax >= steps_) return 1.0;
            return prefix_[static_cast<std::size_t>(jmax)];
        }
        default:
            throw DomainError("cumulative: continuous kernel");
    }
}

// --- continuous ----------------------------------------------------------------

double Kernel::density(double x, double y) const {
    double rt = std::sqrt(horizon_);
    switch (family_) {
        case KernelFamily::Gaussian:
            return std_normal_pdf((y - x) / rt) / rt;
        case KernelFamily::ReflectedGaussian: {
            if (x < 0.0 || y < 0.0) throw DomainError("reflected kernel: x, y must be >= 0");
            return (std_normal_pdf((y - x) / rt) + std_normal_pdf((y + x) / rt)) / rt;
        }
        default:
            throw DomainError("density: discrete kernel");
    }
}

double Kernel::cdf(double x, double y) const {
    double rt = std::sqrt(horizon_);
    switch (family_) {
        case KernelFamily::Gaussian:
            return std_normal_cdf((y - x) / rt);
        case KernelFamily::ReflectedGaussian: {
            if (x < 0.0 || y < 0.0) throw DomainError("reflected kernel: x, y must be >= 0");
            return std_normal_cdf((y - x) / rt) - std_normal_cdf(-x / rt) +
                   std_normal_cdf((y + x) / rt) - std_normal_cdf(x / rt);
        }
        default:
            throw DomainError("cdf: discrete kernel");
    }
}

double Kernel::d_source_density(double x, double y) const {
    switch (family_) {
        case KernelFamily::Gaussian:
            return density(x, y) * (y - x) / horizon_;
        case KernelFamily::ReflectedGaussian: {
            if (x < 0.0 || y < 0.0) throw DomainError("reflected kernel: x, y must be >= 0");
            double rt = std::sqrt(horizon_);
            double direct = std_normal_pdf((y - x) / rt) / rt;
            double image = std_normal_pdf((y + x) / rt) / rt;
            return direct * (y - x) / horizon_ - image * (y + x) / horizon_;
        }
        default:
            throw DomainError("d_source_density: discrete kernel");
    }
}

double Kernel::d_source_cdf(double x, double y) const {
    switch (family_) {
        case KernelFamily::Gaussian:
            return -density(x, y);
        case KernelFamily::ReflectedGaussian: {
            if (x < 0.0 || y < 0.0) throw DomainError("reflected kernel: x, y must be >= 0");
            double rt = std::sqrt(horizon_);
            return (-std_normal_pdf((y - x) / rt) + std_normal_pdf((y + x) / rt)) / rt;
        }
        default:
            throw DomainError("d_source_cdf: discrete kernel");
    }
}

// --- unified ----------------------------------------------------------------

namespace {
long as_site(double v, const char* what) {
    long s = std::lround(v);
    if (std::abs(v - static_cast<double>(s)) > 1e-9)
        throw DomainError(std::string(what) + ": expected an integer site");
    return s;
}
} // namespace

double Kernel::weight(double x, double y) const {
    if (state_kind() == StateKind::Discrete)
        return point_prob(as_site(x, "weight x"), as_site(y, "weight y"));
    return density(x, y);
}

double Kernel::cum(double x, double y) const {
    if (state_kind() == StateKind::Discrete) {
        if (y == std::numeric_limits<double>::infinity()) return 1.0;
        return cumulative(as_site(x, "cum x"), as_site(y, "cum y"));
    }
    if (y == std::numeric_limits<double>::infinity()) return 1.0;
    return cdf(x, y);
}

// --- explicit-time surface ---------------------------------------------------

double point_prob(const Kernel& kernel, long x, long y, double t) {
    if (t < 0.0) throw DomainError("point_prob: negative time");
    if (t == kernel.horizon()) return kernel.point_prob(x, y);
    return kernel.with_horizon(t).point_prob(x, y);
}

double cumulative(const Kernel& kernel, long x, long y, double t) {
    if (t < 0.0) throw DomainError("cumulative: negative time");
    if (t == kernel.horizon()) return kernel.cumulative(x, y);
    return kernel.with_horizon(t).cumulative(x, y);
}

} // namespace coalesce
