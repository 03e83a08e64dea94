#pragma once

#include <functional>
#include <span>

#include "coalesce/errors.hpp"

namespace coalesce {

struct QuadratureSpec {
    double relative_tolerance = 1e-9;
    double absolute_tolerance = 1e-12;
    double truncation_radius_sigma = 8.0; ///< infinite endpoints cut at center +/- radius*scale
    int max_subdivisions = 24;            ///< bisection depth per panel

    void validate() const {
        if (!(relative_tolerance > 0.0) || !(absolute_tolerance > 0.0))
            throw DomainError("quadrature spec: tolerances must be > 0");
        if (!(truncation_radius_sigma >= 4.0))
            throw DomainError("quadrature spec: truncation radius must be >= 4 sigma");
    }
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0; ///< conservative bound (Gauss-Kronrod discrepancy sum)
    long evaluations = 0;
};

/// Location/scale hint used to truncate infinite endpoints.
struct DomainHint {
    double center = 0.0;
    double scale = 1.0;
};

/// Adaptive Gauss-Kronrod (15/7) with greedy bisection of the worst panel.
/// Throws NonConvergenceError when a panel reaches max_subdivisions without
/// meeting the tolerance.
QuadResult integrate_1d(const std::function<double(double)>& f,
                        double lo, double hi,
                        const QuadratureSpec& spec = {},
                        DomainHint hint = {});

/// Same machinery for a vector-valued integrand (shared panels, per-component
/// error control). f(x, out) fills out[0..n).
QuadResult integrate_1d_many(long n,
                             const std::function<void(double, std::span<double>)>& f,
                             std::span<double> values,
                             std::span<double> errors,
                             double lo, double hi,
                             const QuadratureSpec& spec = {},
                             DomainHint hint = {});

/// Integral of f over the ordered half-plane { u < v }, mapped to
/// (u, w = v - u > 0). `u_hint` truncates the u line; w runs over
/// (0, w_hint.center + radius * w_hint.scale].
QuadResult integrate_ordered_2d(const std::function<double(double, double)>& f,
                                const QuadratureSpec& spec = {},
                                DomainHint u_hint = {},
                                DomainHint w_hint = {});

/// Ordered k-dimensional integral over { u_1 < ... < u_k }, k <= 3.
QuadResult integrate_ordered_kd(const std::function<double(std::span<const double>)>& f,
                                int k,
                                const QuadratureSpec& spec = {},
                                DomainHint u_hint = {},
                                DomainHint w_hint = {});

} // namespace coalesce
