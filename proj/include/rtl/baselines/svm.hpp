#pragma once

#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "../corpus.hpp"
#include "../dtm.hpp"
#include "../error.hpp"
#include "../rng.hpp"

namespace rtl::baselines {

/// Row-major sparse rows; unlike DocumentTermMatrix entries may be negative.
struct SparseRows {
    std::size_t cols = 0;
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows;

    static SparseRows from_dtm(const DocumentTermMatrix& dtm)
    {
        SparseRows out{dtm.cols(), {}};
        out.rows.resize(dtm.rows());
        for (std::size_t i = 0; i < dtm.rows(); ++i) {
            const auto r = dtm.row(i);
            for (std::size_t e = 0; e < r.size(); ++e) out.rows[i].emplace_back(r.index[e], r.value[e]);
        }
        return out;
    }

    static SparseRows from_dense(const Eigen::MatrixXd& x)
    {
        SparseRows out{static_cast<std::size_t>(x.cols()), {}};
        out.rows.resize(static_cast<std::size_t>(x.rows()));
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index j = 0; j < x.cols(); ++j)
                if (x(i, j) != 0.0) out.rows[static_cast<std::size_t>(i)].emplace_back(static_cast<std::uint32_t>(j), x(i, j));
        return out;
    }
};

struct SvmModel {
    std::vector<double> weights;
    double bias = 0.0;
    double cost = 1.0;
};

/// Maps 0/1 labels to -1/+1.
inline std::vector<int> to_signed_labels(std::span<const int> y01)
{
    std::vector<int> out;
    out.reserve(y01.size());
    for (int y : y01) out.push_back(y ? 1 : -1);
    return out;
}

namespace detail {

template <class Row>
double decision_value(const std::vector<double>& w, double b, const Row& row)
{
    double s = b;
    for (const auto& [j, v] : row)
        if (j < w.size()) s += w[j] * v;
    return s;
}

} // namespace detail

inline double svm_decision(const SvmModel& model, const SparseRowView& row)
{
    double s = model.bias;
    for (std::size_t e = 0; e < row.size(); ++e)
        if (row.index[e] < model.weights.size()) s += model.weights[row.index[e]] * row.value[e];
    return s;
}

/// 0.5 |w|^2 + C sum_i max(0, 1 - y_i (w'x_i + b)).
inline double svm_objective(const SparseRows& x, std::span<const int> y_pm, const std::vector<double>& w, double b,
                            double cost)
{
    double hinge = 0.0;
    for (std::size_t i = 0; i < x.rows.size(); ++i)
        hinge += std::max(0.0, 1.0 - static_cast<double>(y_pm[i]) * detail::decision_value(w, b, x.rows[i]));
    double sq = 0.0;
    for (double wj : w) sq += wj * wj;
    return 0.5 * sq + cost * hinge;
}

/// Linear primal SVM by stochastic subgradient descent on the equivalent
/// objective (lambda/2)|w|^2 + mean hinge with lambda = 1/(C n), step
/// 1/(lambda (t + t0)), a per-epoch deterministic shuffle and averaging of
/// the iterates over the second half of training. Returns whichever of the
/// averaged and final iterates has the lower objective.
inline SvmModel svm_fit(const SparseRows& x, std::span<const int> y_pm, double cost, int epochs, std::uint64_t seed)
{
    const std::size_t n = x.rows.size();
    rtl::detail::require(y_pm.size() == n, ErrorKind::DimensionMismatch, "label count differs from row count");
    rtl::detail::require(cost > 0.0 && std::isfinite(cost), ErrorKind::Parameter, "cost must be finite and > 0");
    rtl::detail::require(epochs >= 1, ErrorKind::Parameter, "epochs must be >= 1");
    bool has_pos = false, has_neg = false;
    for (int y : y_pm) {
        rtl::detail::require(y == 1 || y == -1, ErrorKind::Parameter, "SVM labels must be -1 or +1");
        (y > 0 ? has_pos : has_neg) = true;
    }
    rtl::detail::require(has_pos && has_neg, ErrorKind::DegenerateLabels, "both classes must be present");

    const double lambda = 1.0 / (cost * static_cast<double>(n));
    // t0 bounds the first step at 1.
    const double t0 = std::max(1.0, 1.0 / lambda);
    std::vector<double> w(x.cols, 0.0), w_avg(x.cols, 0.0);
    double b = 0.0, b_avg = 0.0;
    // w is stored as scale * u so the shrink step is O(1).
    double scale = 1.0;
    std::vector<double> u(x.cols, 0.0);
    double averaged = 0.0;
    const std::size_t total_steps = static_cast<std::size_t>(epochs) * n;
    const std::size_t average_from = total_steps / 2;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(seed, 0x73766dULL));
    std::size_t t = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        shuffle(std::span(order), rng);
        for (auto i : order) {
            ++t;
            const double eta = 1.0 / (lambda * (static_cast<double>(t) + t0));
            double margin = b;
            for (const auto& [j, v] : x.rows[i]) margin += scale * u[j] * v;
            margin *= static_cast<double>(y_pm[i]);
            scale *= (1.0 - eta * lambda);
            if (margin < 1.0) {
                for (const auto& [j, v] : x.rows[i]) u[j] += eta * static_cast<double>(y_pm[i]) * v / scale;
                b += eta * static_cast<double>(y_pm[i]);
            }
            if (scale < 1e-9) {
                for (auto& uj : u) uj *= scale;
                scale = 1.0;
            }
            if (t > average_from) {
                averaged += 1.0;
                const double rate = 1.0 / averaged;
                for (std::size_t j = 0; j < x.cols; ++j) w_avg[j] += rate * (scale * u[j] - w_avg[j]);
                b_avg += rate * (b - b_avg);
            }
        }
        if (!std::isfinite(scale) || !std::isfinite(b))
            throw Error(ErrorKind::Numerical, "SVM training diverged; reduce the learning rate");
    }
    for (std::size_t j = 0; j < x.cols; ++j) w[j] = scale * u[j];
    const double last = svm_objective(x, y_pm, w, b, cost);
    const double avg = svm_objective(x, y_pm, w_avg, b_avg, cost);
    if (!std::isfinite(last) && !std::isfinite(avg))
        throw Error(ErrorKind::Numerical, "SVM objective is not finite; reduce the learning rate");
    if (avg <= last || !std::isfinite(last)) return {std::move(w_avg), b_avg, cost};
    return {std::move(w), b, cost};
}

inline SvmModel svm_fit(const DocumentTermMatrix& dtm, std::span<const int> y_pm, double cost, int epochs,
                        std::uint64_t seed)
{
    return svm_fit(SparseRows::from_dtm(dtm), y_pm, cost, epochs, seed);
}

/// Sign of the decision value; zero maps to Positive.
inline Polarity svm_predict(const SvmModel& model, const SparseRowView& row)
{
    return svm_decision(model, row) >= 0.0 ? Polarity::Positive : Polarity::Negative;
}

/// Costs log-spaced over [0.1, 100].
inline std::vector<double> default_svm_costs(std::size_t count = 7)
{
    std::vector<double> out;
    for (std::size_t k = 0; k < count; ++k)
        out.push_back(std::pow(10.0, -1.0 + 3.0 * static_cast<double>(k) / static_cast<double>(count - 1)));
    return out;
}

} // namespace rtl::baselines
