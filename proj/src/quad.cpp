#include "coalesce/quad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace coalesce {

namespace {

// Gauss 7 / Kronrod 15 node-weight table on [-1, 1] (positive half).
// Column 0: abscissa, column 1: Gauss weight (0 for Kronrod-only nodes),
// column 2: Kronrod weight.
constexpr double kG7K15[8][3] = {
    {0.000000000000000000000000000000000, 0.417959183673469387755102040816327, 0.209482141084727828012999174891714},
    {0.405845151377397166906606412076961, 0.381830050505118944950369775488975, 0.190350578064785409913256402421014},
    {0.741531185599394439863864773280788, 0.279705391489276667901467771423780, 0.140653259715525918745189590510238},
    {0.949107912342758524526189684047851, 0.129484966168869693270611432679082, 0.063092092629978553290700663189204},
    {0.207784955007898467600689403773245, 0.0, 0.204432940075298892414161999234649},
    {0.586087235467691130294144838258730, 0.0, 0.169004726639267902826583426598550},
    {0.864864423359769072789712788640926, 0.0, 0.104790010322250183839876322541518},
    {0.991455371120812639206854697526329, 0.0, 0.022935322010529224963732008058970},
};

struct Panel {
    double a, b;
    std::vector<double> value; // per component
    double error;              // max over components
    int depth;
    bool operator<(const Panel& o) const { return error < o.error; }
};

using VecFn = std::function<void(double, std::span<double>)>;

Panel eval_panel(long n, const VecFn& f, double a, double b, int depth, long& evals) {
    Panel p;
    p.a = a;
    p.b = b;
    p.depth = depth;
    p.value.assign(static_cast<std::size_t>(n), 0.0);
    std::vector<double> g7(static_cast<std::size_t>(n), 0.0);
    std::vector<double> buf(static_cast<std::size_t>(n));
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    auto accumulate = [&](double x, double wg, double wk) {
        f(x, buf);
        ++evals;
        for (long c = 0; c < n; ++c) {
            p.value[static_cast<std::size_t>(c)] += wk * buf[static_cast<std::size_t>(c)];
            if (wg != 0.0) g7[static_cast<std::size_t>(c)] += wg * buf[static_cast<std::size_t>(c)];
        }
    };
    accumulate(mid, kG7K15[0][1], kG7K15[0][2]);
    for (int i = 1; i < 8; ++i) {
        double dx = half * kG7K15[i][0];
        accumulate(mid + dx, kG7K15[i][1], kG7K15[i][2]);
        accumulate(mid - dx, kG7K15[i][1], kG7K15[i][2]);
    }
    p.error = 0.0;
    for (long c = 0; c < n; ++c) {
        p.value[static_cast<std::size_t>(c)] *= half;
        g7[static_cast<std::size_t>(c)] *= half;
        p.error = std::max(p.error,
                           std::abs(p.value[static_cast<std::size_t>(c)] - g7[static_cast<std::size_t>(c)]));
    }
    return p;
}

} // namespace

QuadResult integrate_1d_many(long n, const VecFn& f,
                             std::span<double> values, std::span<double> errors,
                             double lo, double hi,
                             const QuadratureSpec& spec, DomainHint hint) {
    spec.validate();
    if (static_cast<long>(values.size()) != n || static_cast<long>(errors.size()) != n)
        throw DomainError("integrate_1d_many: output span size mismatch");
    double radius = spec.truncation_radius_sigma * hint.scale;
    double a = std::isinf(lo) ? hint.center - radius : lo;
    double b = std::isinf(hi) ? hint.center + radius : hi;
    if (!(b > a)) {
        std::fill(values.begin(), values.end(), 0.0);
        std::fill(errors.begin(), errors.end(), 0.0);
        return {0.0, 0.0, 0};
    }

    QuadResult res;
    std::priority_queue<Panel> queue;
    queue.push(eval_panel(n, f, a, b, 0, res.evaluations));
    double total_err = queue.top().error;
    std::vector<double> total(static_cast<std::size_t>(n));
    for (long c = 0; c < n; ++c) total[static_cast<std::size_t>(c)] = queue.top().value[static_cast<std::size_t>(c)];

    auto tolerance = [&] {
        double mag = 0.0;
        for (double v : total) mag = std::max(mag, std::abs(v));
        return std::max(spec.absolute_tolerance, spec.relative_tolerance * mag);
    };

    while (total_err > tolerance()) {
        Panel worst = queue.top();
        queue.pop();
        if (worst.depth >= spec.max_subdivisions)
            throw NonConvergenceError("integrate_1d: panel budget exhausted before tolerance");
        double mid = 0.5 * (worst.a + worst.b);
        Panel left = eval_panel(n, f, worst.a, mid, worst.depth + 1, res.evaluations);
        Panel right = eval_panel(n, f, mid, worst.b, worst.depth + 1, res.evaluations);
        total_err += left.error + right.error - worst.error;
        for (long c = 0; c < n; ++c)
            total[static_cast<std::size_t>(c)] +=
                left.value[static_cast<std::size_t>(c)] + right.value[static_cast<std::size_t>(c)] -
                worst.value[static_cast<std::size_t>(c)];
        queue.push(std::move(left));
        queue.push(std::move(right));
    }

    // re-accumulate panel sums in a fixed (interval) order for determinism
    std::vector<Panel> panels;
    while (!queue.empty()) {
        panels.push_back(queue.top());
        queue.pop();
    }
    std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    std::fill(values.begin(), values.end(), 0.0);
    std::fill(errors.begin(), errors.end(), 0.0);
    for (const auto& p : panels)
        for (long c = 0; c < n; ++c) {
            values[static_cast<std::size_t>(c)] += p.value[static_cast<std::size_t>(c)];
            errors[static_cast<std::size_t>(c)] += p.error;
        }
    res.value = values[0];
    res.error = errors[0];
    return res;
}

QuadResult integrate_1d(const std::function<double(double)>& f,
                        double lo, double hi,
                        const QuadratureSpec& spec, DomainHint hint) {
    double value = 0.0, error = 0.0;
    QuadResult r = integrate_1d_many(
        1,
        [&f](double x, std::span<double> out) { out[0] = f(x); },
        std::span<double>(&value, 1), std::span<double>(&error, 1), lo, hi, spec, hint);
    return r;
}

QuadResult integrate_ordered_kd(const std::function<double(std::span<const double>)>& f,
                                int k,
                                const QuadratureSpec& spec,
                                DomainHint u_hint, DomainHint w_hint) {
    spec.validate();
    if (k < 1 || k > 3) throw DomainError("integrate_ordered_kd: k must be 1, 2 or 3");
    double w_hi = w_hint.center + spec.truncation_radius_sigma * w_hint.scale;

    if (k == 1) {
        return integrate_1d(
            [&f](double u) {
                double pt[1] = {u};
                return f(std::span<const double>(pt, 1));
            },
            -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            spec, u_hint);
    }

    // Gap variables w_i = u_{i+1} - u_i > 0 keep the integrand smooth along
    // the collision boundaries where the determinant vanishes.
    QuadratureSpec inner = spec;
    inner.absolute_tolerance = spec.absolute_tolerance / (4.0 * std::max(1.0, w_hi));
    inner.relative_tolerance = spec.relative_tolerance * 0.25;

    long evals = 0;
    double inner_err_max = 0.0;

    if (k == 2) {
        auto outer = integrate_1d(
            [&](double w) {
                auto r = integrate_1d(
                    [&](double u) {
                        double pt[2] = {u, u + w};
                        return f(std::span<const double>(pt, 2));
                    },
                    -std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity(), inner, u_hint);
                evals += r.evaluations;
                inner_err_max = std::max(inner_err_max, r.error);
                return r.value;
            },
            0.0, w_hi, spec, w_hint);
        outer.evaluations += evals;
        outer.error += inner_err_max * w_hi;
        return outer;
    }

    QuadratureSpec mid = inner;
    auto outer = integrate_1d(
        [&](double r2) {
            double mid_err_local = 0.0;
            auto rm = integrate_1d(
                [&](double w) {
                    auto ri = integrate_1d(
                        [&](double u) {
                            double pt[3] = {u, u + w, u + w + r2};
                            return f(std::span<const double>(pt, 3));
                        },
                        -std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity(), inner, u_hint);
                    evals += ri.evaluations;
                    inner_err_max = std::max(inner_err_max, ri.error);
                    return ri.value;
                },
                0.0, w_hi, mid, w_hint);
            evals += rm.evaluations;
            mid_err_local = rm.error;
            inner_err_max = std::max(inner_err_max, mid_err_local);
            return rm.value;
        },
        0.0, w_hi, spec, w_hint);
    outer.evaluations += evals;
    outer.error += inner_err_max * w_hi * (1.0 + w_hi);
    return outer;
}

QuadResult integrate_ordered_2d(const std::function<double(double, double)>& f,
                                const QuadratureSpec& spec,
                                DomainHint u_hint, DomainHint w_hint) {
    return integrate_ordered_kd(
        [&f](std::span<const double> u) { return f(u[0], u[1]); }, 2, spec, u_hint, w_hint);
}

} // namespace coalesce
