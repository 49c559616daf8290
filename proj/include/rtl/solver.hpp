#pragma once

// SCAD-penalized logistic regression: outer iteratively reweighted quadratic
// approximation, inner cyclic coordinate descent with incremental residuals.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "design.hpp"
#include "dtm.hpp"
#include "error.hpp"
#include "penalty.hpp"

namespace rtl {

struct FitOptions {
    double tolerance = 1e-7;        // sup-norm coefficient change
    int max_outer_iters = 100;
    int max_inner_sweeps = 1000;
    bool adaptive_rescaling = false;
    bool standardize = false;       // scale columns to unit mean square; no centering
    bool fit_intercept = true;      // unpenalized
    double weight_floor = 1e-5;
    double coefficient_cap = std::numeric_limits<double>::infinity();
    int max_step_halvings = 30;     // backtracking when an outer step raises Q_n

    void validate() const
    {
        detail::require(tolerance > 0.0, ErrorKind::Parameter, "tolerance must be > 0");
        detail::require(max_outer_iters >= 1 && max_inner_sweeps >= 1, ErrorKind::Parameter,
                        "iteration caps must be >= 1");
        detail::require(weight_floor > 0.0 && weight_floor < 0.25, ErrorKind::Parameter,
                        "weight_floor must lie in (0, 1/4)");
        detail::require(coefficient_cap > 0.0, ErrorKind::Parameter, "coefficient_cap must be > 0");
        detail::require(max_step_halvings >= 0, ErrorKind::Parameter, "max_step_halvings must be >= 0");
    }
};

struct WarmStart {
    double intercept = 0.0;
    std::vector<double> coefficients;
};

/// Dense result of one fit, coefficients on the original column scale.
struct FitResult {
    double intercept = 0.0;
    std::vector<double> coefficients;
    ScadParams params{0.0, 3.7};
    bool converged = false;
    int outer_iterations = 0;
    int inner_sweeps = 0;
    /// Penalized objective on the fitting scale: entry 0 at the start, then one
    /// per outer iteration.
    std::vector<double> objective_trace;
    /// Outer steps where backtracking could not restore descent.
    int monotonicity_violations = 0;
    /// Smallest v_j over nonempty columns at the final quadratic approximation.
    double min_curvature = std::numeric_limits<double>::infinity();

    WarmStart warm_start() const { return {intercept, coefficients}; }
    std::size_t nonzero_count() const
    {
        return static_cast<std::size_t>(std::count_if(coefficients.begin(), coefficients.end(),
                                                      [](double b) { return b != 0.0; }));
    }
};

namespace detail {

inline double sigmoid(double eta) noexcept
{
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

inline double clamp_log(double p) noexcept { return std::log(std::max(p, 1e-12)); }

inline double mean_nll(std::span<const double> eta, std::span<const int> y)
{
    double s = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) {
        const double pi = sigmoid(eta[i]);
        s += y[i] ? clamp_log(pi) : clamp_log(1.0 - pi);
    }
    return -s / static_cast<double>(eta.size());
}

inline double penalty_sum(std::span<const double> beta, const ScadParams& params)
{
    double s = 0.0;
    for (double b : beta) s += scad_penalty(b, params);
    return s;
}

inline void check_labels(std::span<const int> y, std::size_t n)
{
    require(y.size() == n, ErrorKind::DimensionMismatch, "label count differs from row count");
    require(n > 0, ErrorKind::InsufficientData, "empty design");
    std::size_t pos = 0;
    for (int v : y) {
        require(v == 0 || v == 1, ErrorKind::Parameter, "labels must be 0 or 1");
        pos += static_cast<std::size_t>(v);
    }
    require(pos > 0 && pos < n, ErrorKind::DegenerateLabels, "both classes must be present");
}

template <ColumnDesign D>
std::vector<double> column_scales(const D& x, bool standardize)
{
    std::vector<double> scale(x.cols(), 1.0);
    if (!standardize) return scale;
    const std::vector<double> ones(x.rows(), 1.0);
    for (std::size_t j = 0; j < x.cols(); ++j) {
        const double ms = x.weighted_sq_norm(j, ones) / static_cast<double>(x.rows());
        scale[j] = ms > 0.0 ? std::sqrt(ms) : 1.0;
    }
    return scale;
}

inline double logit_mean(std::span<const int> y)
{
    double pos = 0.0;
    for (int v : y) pos += v;
    const double ybar = pos / static_cast<double>(y.size());
    return std::log(ybar / (1.0 - ybar));
}


/// One cyclic pass: unpenalized intercept, then every column in ascending
/// order. Maintains r = ytilde - eta incrementally. Returns the largest
/// absolute coefficient change.
template <ColumnDesign D>
double coordinate_sweep(const D& x, std::span<const double> w, std::span<double> r, std::span<const double> v,
                        std::span<const double> inv_scale, double w_sum, const ScadParams& params,
                        const FitOptions& options, std::span<double> beta, double& intercept)
{
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    const double cap = options.coefficient_cap;
    double max_change = 0.0;
    if (options.fit_intercept) {
        double s = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) s += w[i] * r[i];
        const double delta = s / w_sum;
        intercept += delta;
        for (auto& ri : r) ri -= delta;
        max_change = std::abs(delta);
    }
    for (std::size_t j = 0; j < beta.size(); ++j) {
        if (!(v[j] > 0.0)) {
            beta[j] = 0.0;
            continue;
        }
        const double z = x.weighted_dot(j, w, r) * inv_n * inv_scale[j] + v[j] * beta[j];
        double updated = options.adaptive_rescaling ? scad_rescaled_update(z, v[j], params)
                                                    : scad_coordinate_update(z, v[j], params);
        updated = std::clamp(updated, -cap, cap);
        const double delta = updated - beta[j];
        if (delta != 0.0) {
            x.axpy(j, -delta * inv_scale[j], r);
            beta[j] = updated;
            max_change = std::max(max_change, std::abs(delta));
        }
    }
    return max_change;
}

} // namespace detail

/// l_n: mean negative log-likelihood with log arguments clamped at 1e-12.
template <ColumnDesign D>
double negative_log_likelihood(const D& x, std::span<const int> y, double intercept, std::span<const double> beta)
{
    detail::require(y.size() == x.rows(), ErrorKind::DimensionMismatch, "label count differs from row count");
    const auto eta = linear_predictor(x, intercept, beta);
    return detail::mean_nll(eta, y);
}

/// Q_n = l_n + sum_j scad(beta_j); the intercept is not penalized.
template <ColumnDesign D>
double objective(const D& x, std::span<const int> y, double intercept, std::span<const double> beta,
                 const ScadParams& params)
{
    return negative_log_likelihood(x, y, intercept, beta) + detail::penalty_sum(beta, params);
}

namespace detail {

// Smallest lambda at which the coordinate update maps (z, v) to zero. Equals
// |z| when v > 1/(gamma-1); below that curvature a distant minimizer can beat
// zero, which pushes the level higher. The predicate is monotone in lambda.
inline double zero_update_level(double z, double v, double gamma, bool rescaled)
{
    const double az = std::abs(z);
    if (az == 0.0) return 0.0;
    auto zero_at = [&](double l) {
        const ScadParams prm(l, gamma);
        return (rescaled ? scad_rescaled_update(z, v, prm) : scad_coordinate_update(z, v, prm)) == 0.0;
    };
    double lo = az;
    if (zero_at(lo)) return lo;
    double hi = 2.0 * az;
    while (!zero_at(hi)) {
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo > 1e-14 * hi) {
        const double mid = 0.5 * (lo + hi);
        (zero_at(mid) ? hi : lo) = mid;
    }
    return hi;
}

} // namespace detail

/// Smallest lambda at which the first quadratic approximation around the
/// intercept-only model leaves every penalized coefficient at zero. This is
/// max_j |n^-1 x_j' (y - pi0)| whenever every null-model curvature
/// v_j exceeds 1/(gamma-1); flatter columns raise it. A relative guard of
/// 1e-10 covers rounding in the solver's own evaluation of the same quantities.
template <ColumnDesign D>
double lambda_max(const D& x, std::span<const int> y, double gamma, const FitOptions& options = {})
{
    detail::check_labels(y, x.rows());
    detail::require(gamma > 2.0, ErrorKind::Parameter, "gamma must be > 2");
    const auto scale = detail::column_scales(x, options.standardize);
    const double pi0 = options.fit_intercept ? detail::sigmoid(detail::logit_mean(y)) : 0.5;
    const double w0 = std::max(pi0 * (1.0 - pi0), options.weight_floor);
    const double inv_n = 1.0 / static_cast<double>(y.size());
    std::vector<double> resid(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) resid[i] = static_cast<double>(y[i]) - pi0;
    const std::vector<double> ones(y.size(), 1.0);
    double best = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        const double z = x.weighted_dot(j, ones, resid) * inv_n / scale[j];
        const double v = w0 * x.weighted_sq_norm(j, ones) * inv_n / (scale[j] * scale[j]);
        if (!(v > 0.0)) continue;
        best = std::max(best, detail::zero_update_level(z, v, gamma, options.adaptive_rescaling));
    }
    if (!(best > 0.0)) throw Error(ErrorKind::DegenerateDesign, "all feature columns are orthogonal to the labels");
    return best * (1.0 + 1e-10);
}

/// n_lambdas log-spaced values from lambda_max(gamma) down to ratio * lambda_max.
template <ColumnDesign D>
std::vector<double> lambda_path(const D& x, std::span<const int> y, std::size_t n_lambdas, double ratio,
                                double gamma, const FitOptions& options = {})
{
    detail::require(ratio > 0.0 && ratio < 1.0, ErrorKind::Parameter, "ratio must lie in (0,1)");
    detail::require(n_lambdas >= 2, ErrorKind::Parameter, "n_lambdas must be >= 2");
    const double top = lambda_max(x, y, gamma, options);
    std::vector<double> path(n_lambdas);
    for (std::size_t k = 0; k < n_lambdas; ++k)
        path[k] = top * std::pow(ratio, static_cast<double>(k) / static_cast<double>(n_lambdas - 1));
    path.back() = top * ratio;
    return path;
}

template <ColumnDesign D>
FitResult fit(const D& x, std::span<const int> y, const ScadParams& params, const FitOptions& options = {},
              const WarmStart* warm_start = nullptr)
{
    options.validate();
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    detail::check_labels(y, n);
    const double inv_n = 1.0 / static_cast<double>(n);

    const auto scale = detail::column_scales(x, options.standardize);
    // Work on the scaled problem: column j is x_j / scale_j, coefficient beta_j * scale_j.
    std::vector<double> beta(p, 0.0);
    double b0 = options.fit_intercept ? detail::logit_mean(y) : 0.0;
    if (warm_start) {
        detail::require(warm_start->coefficients.size() == p, ErrorKind::DimensionMismatch,
                        "warm start length differs from column count");
        for (std::size_t j = 0; j < p; ++j) beta[j] = warm_start->coefficients[j] * scale[j];
        if (options.fit_intercept) b0 = warm_start->intercept;
    }
    std::vector<double> inv_scale(p);
    for (std::size_t j = 0; j < p; ++j) inv_scale[j] = 1.0 / scale[j];

    auto predictor = [&](double intercept, const std::vector<double>& b) {
        std::vector<double> eta(n, intercept);
        for (std::size_t j = 0; j < p; ++j)
            if (b[j] != 0.0) x.axpy(j, b[j] * inv_scale[j], eta);
        return eta;
    };
    auto penalized = [&](const std::vector<double>& eta, const std::vector<double>& b) {
        return detail::mean_nll(eta, y) + detail::penalty_sum(b, params);
    };

    FitResult result;
    result.params = params;
    std::vector<double> eta = predictor(b0, beta);
    double q = penalized(eta, beta);
    if (!std::isfinite(q)) throw Error(ErrorKind::Numerical, "non-finite objective at the starting point");
    result.objective_trace.push_back(q);

    std::vector<double> w(n), r(n), v(p);

    for (int outer = 1; outer <= options.max_outer_iters; ++outer) {
        result.outer_iterations = outer;
        // Quadratic approximation at the current iterate: r = ytilde - eta = (y - pi) / w.
        for (std::size_t i = 0; i < n; ++i) {
            const double pi = detail::sigmoid(eta[i]);
            w[i] = std::max(pi * (1.0 - pi), options.weight_floor);
            r[i] = (static_cast<double>(y[i]) - pi) / w[i];
        }
        double min_v = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < p; ++j) {
            v[j] = x.weighted_sq_norm(j, w) * inv_n * inv_scale[j] * inv_scale[j];
            if (v[j] > 0.0) min_v = std::min(min_v, v[j]);
        }
        result.min_curvature = min_v;
        const double w_sum = [&] {
            double s = 0.0;
            for (double wi : w) s += wi;
            return s;
        }();

        const std::vector<double> beta_prev = beta;
        const double b0_prev = b0;
        for (int sweep = 0; sweep < options.max_inner_sweeps; ++sweep) {
            ++result.inner_sweeps;
            const double max_change =
                detail::coordinate_sweep(x, w, r, v, inv_scale, w_sum, params, options, beta, b0);
            if (max_change < options.tolerance) break;
        }

        std::vector<double> eta_new = predictor(b0, beta);
        double q_new = penalized(eta_new, beta);
        const double slack = 1e-13 * std::max(1.0, std::abs(q));
        if (!(q_new <= q + slack)) {
            // Step halving toward the previous iterate.
            const std::vector<double> beta_full = beta;
            const double b0_full = b0;
            bool restored = false;
            double t = 1.0;
            for (int h = 0; h < options.max_step_halvings; ++h) {
                t *= 0.5;
                for (std::size_t j = 0; j < p; ++j) beta[j] = beta_prev[j] + t * (beta_full[j] - beta_prev[j]);
                b0 = b0_prev + t * (b0_full - b0_prev);
                eta_new = predictor(b0, beta);
                q_new = penalized(eta_new, beta);
                if (q_new <= q + slack) {
                    restored = true;
                    break;
                }
            }
            if (!restored) ++result.monotonicity_violations;
        }
        if (!std::isfinite(q_new)) throw Error(ErrorKind::Numerical, "non-finite objective during fit");

        double change = options.fit_intercept ? std::abs(b0 - b0_prev) : 0.0;
        for (std::size_t j = 0; j < p; ++j) change = std::max(change, std::abs(beta[j] - beta_prev[j]));
        eta = std::move(eta_new);
        q = q_new;
        result.objective_trace.push_back(q);
        if (change < options.tolerance) {
            result.converged = true;
            break;
        }
    }

    result.intercept = b0;
    result.coefficients.resize(p);
    for (std::size_t j = 0; j < p; ++j) result.coefficients[j] = beta[j] * inv_scale[j];
    return result;
}

/// Fits along a descending lambda sequence, warm-starting each fit from the previous.
template <ColumnDesign D>
std::vector<FitResult> fit_path(const D& x, std::span<const int> y, std::span<const double> lambdas, double gamma,
                                const FitOptions& options = {})
{
    std::vector<FitResult> out;
    out.reserve(lambdas.size());
    for (double lambda : lambdas) {
        const WarmStart* warm = nullptr;
        WarmStart ws;
        if (!out.empty()) {
            ws = out.back().warm_start();
            warm = &ws;
        }
        out.push_back(fit(x, y, ScadParams(lambda, gamma), options, warm));
    }
    return out;
}

// ---- fitted model bound to a vocabulary -------------------------------------

struct Coefficient {
    std::uint32_t index;
    double value;
};

class ScadModel {
public:
    ScadModel(double intercept, std::vector<Coefficient> coefficients,
              std::shared_ptr<const std::vector<std::string>> vocabulary, ScadParams params, Weighting weighting,
              bool converged = true, int outer_iterations = 0)
        : intercept_(intercept), coefficients_(std::move(coefficients)), vocabulary_(std::move(vocabulary)),
          params_(params), weighting_(weighting), converged_(converged), outer_iterations_(outer_iterations)
    {
        detail::require(vocabulary_ != nullptr, ErrorKind::Parameter, "model needs a vocabulary");
        std::sort(coefficients_.begin(), coefficients_.end(),
                  [](const Coefficient& a, const Coefficient& b) { return a.index < b.index; });
        std::erase_if(coefficients_, [](const Coefficient& c) { return c.value == 0.0; });
        for (std::size_t k = 0; k < coefficients_.size(); ++k) {
            detail::require(coefficients_[k].index < vocabulary_->size(), ErrorKind::DimensionMismatch,
                            "coefficient index outside vocabulary");
            detail::require(k == 0 || coefficients_[k].index != coefficients_[k - 1].index, ErrorKind::Parameter,
                            "duplicate coefficient index");
        }
    }

    static ScadModel from_fit(const FitResult& fit, std::shared_ptr<const std::vector<std::string>> vocabulary,
                              Weighting weighting)
    {
        std::vector<Coefficient> coefs;
        for (std::size_t j = 0; j < fit.coefficients.size(); ++j)
            if (fit.coefficients[j] != 0.0) coefs.push_back({static_cast<std::uint32_t>(j), fit.coefficients[j]});
        return ScadModel(fit.intercept, std::move(coefs), std::move(vocabulary), fit.params, weighting, fit.converged,
                         fit.outer_iterations);
    }

    double intercept() const noexcept { return intercept_; }
    const std::vector<Coefficient>& coefficients() const noexcept { return coefficients_; }
    const std::vector<std::string>& vocabulary() const noexcept { return *vocabulary_; }
    const ScadParams& params() const noexcept { return params_; }
    Weighting weighting() const noexcept { return weighting_; }
    bool converged() const noexcept { return converged_; }
    int outer_iterations() const noexcept { return outer_iterations_; }

    double coefficient(std::size_t j) const noexcept
    {
        const auto it = std::lower_bound(coefficients_.begin(), coefficients_.end(), j,
                                         [](const Coefficient& c, std::size_t idx) { return c.index < idx; });
        return (it != coefficients_.end() && it->index == j) ? it->value : 0.0;
    }

    std::vector<double> dense_coefficients() const
    {
        std::vector<double> out(vocabulary_->size(), 0.0);
        for (const auto& c : coefficients_) out[c.index] = c.value;
        return out;
    }

private:
    double intercept_;
    std::vector<Coefficient> coefficients_;
    std::shared_ptr<const std::vector<std::string>> vocabulary_;
    ScadParams params_;
    Weighting weighting_;
    bool converged_;
    int outer_iterations_;
};

inline std::shared_ptr<const std::vector<std::string>> share_vocabulary(const DocumentTermMatrix& dtm)
{
    return std::make_shared<const std::vector<std::string>>(dtm.vocabulary());
}

inline ScadModel fit(const DocumentTermMatrix& dtm, std::span<const int> y, const ScadParams& params,
                     const FitOptions& options = {}, const WarmStart* warm_start = nullptr)
{
    const SparseDesign x(dtm);
    return ScadModel::from_fit(fit(x, y, params, options, warm_start), share_vocabulary(dtm), dtm.weighting());
}

inline double negative_log_likelihood(const ScadModel& model, const DocumentTermMatrix& dtm, std::span<const int> y)
{
    detail::require(dtm.cols() == model.vocabulary().size(), ErrorKind::DimensionMismatch,
                    "matrix columns differ from model vocabulary");
    const auto beta = model.dense_coefficients();
    return negative_log_likelihood(SparseDesign(dtm), y, model.intercept(), beta);
}

inline double objective(const ScadModel& model, const DocumentTermMatrix& dtm, std::span<const int> y)
{
    double pen = 0.0;
    for (const auto& c : model.coefficients()) pen += scad_penalty(c.value, model.params());
    return negative_log_likelihood(model, dtm, y) + pen;
}

/// Probability of Positive, kept strictly inside (0, 1). Row indices outside
/// the model vocabulary are ignored and counted in *unknown_terms.
inline double predict_proba(const ScadModel& model, const SparseRowView& row, std::size_t* unknown_terms = nullptr)
{
    double eta = model.intercept();
    const auto p = model.vocabulary().size();
    for (std::size_t e = 0; e < row.size(); ++e) {
        if (row.index[e] >= p) {
            if (unknown_terms) ++*unknown_terms;
            continue;
        }
        eta += model.coefficient(row.index[e]) * row.value[e];
    }
    const double prob = detail::sigmoid(eta);
    return std::clamp(prob, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

/// Positive iff probability >= cutoff.
inline Polarity predict(const ScadModel& model, const SparseRowView& row, double cutoff = 0.5,
                        std::size_t* unknown_terms = nullptr)
{
    return predict_proba(model, row, unknown_terms) >= cutoff ? Polarity::Positive : Polarity::Negative;
}

struct SelectedFeature {
    std::string term;
    double coefficient;
    friend bool operator==(const SelectedFeature&, const SelectedFeature&) = default;
};

/// Nonzero coefficients by decreasing magnitude; equal magnitudes by term.
inline std::vector<SelectedFeature> selected_features(const ScadModel& model)
{
    std::vector<SelectedFeature> out;
    for (const auto& c : model.coefficients()) out.push_back({model.vocabulary()[c.index], c.value});
    std::sort(out.begin(), out.end(), [](const SelectedFeature& a, const SelectedFeature& b) {
        const double ma = std::abs(a.coefficient);
        const double mb = std::abs(b.coefficient);
        if (ma != mb) return ma > mb;
        return a.term < b.term;
    });
    return out;
}

} // namespace rtl
