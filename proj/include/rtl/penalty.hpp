#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "error.hpp"

namespace rtl {

/// SCAD tuning pair (lambda, gamma). lambda == 0 denotes the unpenalized
/// problem, which the solver uses for maximum-likelihood fits.
class ScadParams {
public:
    ScadParams(double lambda, double gamma) : lambda_(lambda), gamma_(gamma)
    {
        detail::require(std::isfinite(lambda) && lambda >= 0.0, ErrorKind::Parameter, "lambda must be finite and >= 0");
        detail::require(std::isfinite(gamma) && gamma > 2.0, ErrorKind::Parameter, "gamma must be finite and > 2");
    }

    double lambda() const noexcept { return lambda_; }
    double gamma() const noexcept { return gamma_; }

    friend bool operator==(const ScadParams&, const ScadParams&) = default;

private:
    double lambda_;
    double gamma_;
};

/// SCAD penalty of |beta|: linear on [0, lambda], quadratic on (lambda, gamma*lambda],
/// constant (gamma+1) lambda^2 / 2 beyond.
inline double scad_penalty(double beta, const ScadParams& params) noexcept
{
    const double t = std::abs(beta);
    const double l = params.lambda();
    const double g = params.gamma();
    if (t <= l) return l * t;
    if (t <= g * l) return -(t * t - 2.0 * g * l * t + l * l) / (2.0 * (g - 1.0));
    return (g + 1.0) * l * l / 2.0;
}

/// Derivative on the positive half-line.
inline double scad_derivative(double beta, const ScadParams& params)
{
    if (!(beta > 0.0)) throw Error(ErrorKind::Domain, "scad_derivative is defined for beta > 0");
    const double l = params.lambda();
    const double g = params.gamma();
    if (beta <= l) return l;
    return std::max(g * l - beta, 0.0) / (g - 1.0);
}

inline double soft_threshold(double z, double lambda)
{
    detail::require(lambda >= 0.0, ErrorKind::Parameter, "soft_threshold needs lambda >= 0");
    const double t = std::abs(z) - lambda;
    if (t <= 0.0) return 0.0;
    return z > 0.0 ? t : -t;
}

namespace detail {

// Exact minimizer of 0.5 v b^2 - z b + scad(b) by minimizing each piece
// [0, l], [l, g l], [g l, inf) of |b| separately. Valid for any v > 0, including
// the nonconvex case v <= 1/(g-1). Ties go to the earlier piece.
inline double scad_piecewise_minimizer(double z, double v, const ScadParams& params)
{
    const double az = std::abs(z);
    const double l = params.lambda();
    const double g = params.gamma();
    auto objective = [&](double t) { return 0.5 * v * t * t - az * t + scad_penalty(t, params); };

    std::array<double, 3> cand{};
    cand[0] = std::clamp((az - l) / v, 0.0, l);
    const double a = v - 1.0 / (g - 1.0);
    if (a > 0.0) {
        cand[1] = std::clamp((az - g * l / (g - 1.0)) / a, l, g * l);
    } else {
        cand[1] = objective(l) <= objective(g * l) ? l : g * l;
    }
    cand[2] = std::max(az / v, g * l);

    double best = cand[0];
    double best_value = objective(best);
    for (std::size_t k = 1; k < cand.size(); ++k) {
        const double value = objective(cand[k]);
        if (value < best_value) {
            best = cand[k];
            best_value = value;
        }
    }
    return z < 0.0 ? -best : best;
}

} // namespace detail

/// Minimizer of g(b) = 0.5 v b^2 - z b + scad(b).
///
/// When v > 1/(gamma-1) g is convex and the closed-form three-branch rule
/// applies:
///   S(z, l) / v                              |z| <= l (v + 1)
///   S(z, g l / (g - 1)) / (v - 1 / (g - 1))  l (v + 1) < |z| <= v g l
///   z / v                                    |z| > v g l
/// Otherwise the piecewise exact minimizer is used.
inline double scad_coordinate_update(double z, double v, const ScadParams& params)
{
    if (!(v > 0.0)) throw Error(ErrorKind::Domain, "coordinate update needs v > 0");
    const double l = params.lambda();
    const double g = params.gamma();
    const double inv = 1.0 / (g - 1.0);
    if (v <= inv) return detail::scad_piecewise_minimizer(z, v, params);

    const double az = std::abs(z);
    if (az <= l * (v + 1.0)) return soft_threshold(z, l) / v;
    if (az <= v * g * l) return soft_threshold(z, g * l * inv) / (v - inv);
    return z / v;
}

/// Adaptively rescaled update: thresholds z as if v were 1, then divides by v.
/// This is the minimizer of 0.5 v b^2 - z b + scad(v b) / v, i.e. SCAD applied
/// to the coordinate on the scale where its curvature is one.
inline double scad_rescaled_update(double z, double v, const ScadParams& params)
{
    if (!(v > 0.0)) throw Error(ErrorKind::Domain, "coordinate update needs v > 0");
    return scad_coordinate_update(z, 1.0, params) / v;
}

} // namespace rtl
