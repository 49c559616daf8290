#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "design.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "solver.hpp"

namespace rtl {

enum class CvLoss {
    Deviance,          // held-out mean negative log-likelihood
    Misclassification, // held-out error rate at cutoff 0.5
};

/// Fold index in [0, K) for each of n items; sizes differ by at most one.
inline std::vector<int> kfold_split(std::size_t n, int k, std::uint64_t seed)
{
    detail::require(k >= 2, ErrorKind::Parameter, "K must be >= 2");
    detail::require(static_cast<std::size_t>(k) <= n, ErrorKind::Parameter, "K exceeds the number of items");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(seed, 0x6b666f6c64ULL));
    shuffle(std::span(order), rng);
    std::vector<int> fold(n);
    for (std::size_t pos = 0; pos < n; ++pos) fold[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
    return fold;
}

/// Stratified variant: each class is shuffled and dealt round-robin, positives
/// first, so every fold's class counts are within one of the global share.
inline std::vector<int> kfold_split(std::span<const int> labels, int k, std::uint64_t seed)
{
    const std::size_t n = labels.size();
    detail::require(k >= 2, ErrorKind::Parameter, "K must be >= 2");
    detail::require(static_cast<std::size_t>(k) <= n, ErrorKind::Parameter, "K exceeds the number of items");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < n; ++i) (labels[i] ? pos : neg).push_back(i);
    Rng rng(mix_seed(seed, 0x6b666f6c64ULL));
    shuffle(std::span(pos), rng);
    shuffle(std::span(neg), rng);
    std::vector<int> fold(n);
    std::size_t slot = 0;
    for (auto i : pos) fold[i] = static_cast<int>(slot++ % static_cast<std::size_t>(k));
    for (auto i : neg) fold[i] = static_cast<int>(slot++ % static_cast<std::size_t>(k));
    return fold;
}

namespace detail {

template <ColumnDesign D>
double held_out_loss_sum(const D& x, std::span<const int> y, const FitResult& fit, CvLoss loss)
{
    const auto eta = linear_predictor(x, fit.intercept, fit.coefficients);
    double s = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) {
        const double pi = sigmoid(eta[i]);
        if (loss == CvLoss::Deviance) s -= y[i] ? clamp_log(pi) : clamp_log(1.0 - pi);
        else s += ((pi >= 0.5 ? 1 : 0) != y[i]) ? 1.0 : 0.0;
    }
    return s;
}

inline bool has_both_classes(std::span<const int> y)
{
    const auto pos = std::count(y.begin(), y.end(), 1);
    return pos > 0 && static_cast<std::size_t>(pos) < y.size();
}

struct FoldData {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::vector<int> y_train;
    std::vector<int> y_test;
};

inline std::vector<FoldData> make_folds(std::span<const int> y, std::span<const int> fold, int k)
{
    std::vector<FoldData> out(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (int f = 0; f < k; ++f) {
            auto& d = out[static_cast<std::size_t>(f)];
            if (fold[i] == f) {
                d.test.push_back(i);
                d.y_test.push_back(y[i]);
            } else {
                d.train.push_back(i);
                d.y_train.push_back(y[i]);
            }
        }
    }
    return out;
}

/// Held-out loss sums along a lambda path for one fold; empty when the
/// training part lacks a class.
template <ColumnDesign D>
std::vector<double> fold_path_losses(const D& x, const FoldData& fold, std::span<const double> lambdas, double gamma,
                                     const FitOptions& options, CvLoss loss)
{
    if (!has_both_classes(fold.y_train)) return {};
    const D train = x.select_rows(fold.train);
    const D test = x.select_rows(fold.test);
    std::vector<double> out;
    out.reserve(lambdas.size());
    WarmStart warm;
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
        const FitResult f = fit(train, fold.y_train, ScadParams(lambdas[l], gamma), options, l == 0 ? nullptr : &warm);
        out.push_back(held_out_loss_sum(test, fold.y_test, f, loss));
        warm = f.warm_start();
    }
    return out;
}

} // namespace detail

struct CvEntry {
    int k = 0;
    double gamma = 0.0;
    double lambda = 0.0;
    /// Pooled held-out loss: total loss over all held-out points / their count.
    double mean_error = 0.0;
    /// Per-fold loss sums scaled by (folds used / held-out points), so that
    /// their arithmetic mean is mean_error.
    std::vector<double> fold_errors;
    int skipped_folds = 0;
};

namespace detail {

inline void finish_entry(CvEntry& e, const std::vector<double>& sums, const std::vector<std::size_t>& counts)
{
    std::size_t total = 0;
    for (auto c : counts) total += c;
    const double scale = static_cast<double>(sums.size()) / static_cast<double>(total);
    e.fold_errors.clear();
    for (double s : sums) e.fold_errors.push_back(s * scale);
    e.mean_error = std::accumulate(e.fold_errors.begin(), e.fold_errors.end(), 0.0) /
                   static_cast<double>(e.fold_errors.size());
}

} // namespace detail

/// K-fold cross-validated loss of a single (lambda, gamma) fit, pooled over
/// every held-out point. Folds whose training part lacks a class are skipped.
template <ColumnDesign D>
CvEntry cv_entry(const D& x, std::span<const int> y, int k, const ScadParams& params, const FitOptions& options,
                 std::uint64_t seed, CvLoss loss = CvLoss::Deviance)
{
    detail::require(y.size() == x.rows(), ErrorKind::DimensionMismatch, "label count differs from row count");
    const auto fold = kfold_split(y, k, seed);
    const auto folds = detail::make_folds(y, fold, k);
    CvEntry entry{k, params.gamma(), params.lambda(), 0.0, {}, 0};
    std::vector<double> sums;
    std::vector<std::size_t> counts;
    const double lambda = params.lambda();
    for (const auto& f : folds) {
        const auto losses = detail::fold_path_losses(x, f, std::span(&lambda, 1), params.gamma(), options, loss);
        if (losses.empty()) {
            ++entry.skipped_folds;
            continue;
        }
        sums.push_back(losses[0]);
        counts.push_back(f.test.size());
    }
    if (sums.empty()) throw Error(ErrorKind::InsufficientData, "every cross-validation fold was skipped");
    detail::finish_entry(entry, sums, counts);
    return entry;
}

template <ColumnDesign D>
double cv_error(const D& x, std::span<const int> y, int k, const ScadParams& params, const FitOptions& options,
                std::uint64_t seed, CvLoss loss = CvLoss::Deviance)
{
    return cv_entry(x, y, k, params, options, seed, loss).mean_error;
}

struct LambdaStrategy {
    std::size_t count = 30;
    double ratio = 0.01;
    /// Explicit descending values; overrides count/ratio when nonempty.
    std::vector<double> values;
};

struct CvGrid {
    std::vector<int> k_values;
    std::vector<double> gamma_values;
    LambdaStrategy lambda;

    /// K = 5..20, gamma = 2.1..4.0 in steps of 0.1.
    static CvGrid full()
    {
        CvGrid g;
        for (int k = 5; k <= 20; ++k) g.k_values.push_back(k);
        for (int t = 21; t <= 40; ++t) g.gamma_values.push_back(t / 10.0);
        return g;
    }

    void validate() const
    {
        detail::require(!k_values.empty() && !gamma_values.empty(), ErrorKind::Parameter, "empty grid");
        for (int k : k_values) detail::require(k >= 2, ErrorKind::Parameter, "all K must be >= 2");
        for (double g : gamma_values) detail::require(g > 2.0, ErrorKind::Parameter, "all gamma must be > 2");
        for (double l : lambda.values) detail::require(l >= 0.0, ErrorKind::Parameter, "lambda values must be >= 0");
    }
};

struct CvReport {
    /// Sorted by K, then gamma, then descending lambda.
    std::vector<CvEntry> entries;
    std::size_t best_index = 0;
    /// The shared descending lambda sequence.
    std::vector<double> lambdas;
    /// (K, gamma) combinations for which every fold was skipped.
    std::vector<std::pair<int, double>> dropped;

    const CvEntry& best() const { return entries.at(best_index); }
};

namespace detail {

// True when a should be preferred to b: lower error, then larger lambda,
// smaller gamma, smaller K.
inline bool better_entry(const CvEntry& a, const CvEntry& b)
{
    if (a.mean_error != b.mean_error) return a.mean_error < b.mean_error;
    if (a.lambda != b.lambda) return a.lambda > b.lambda;
    if (a.gamma != b.gamma) return a.gamma < b.gamma;
    return a.k < b.k;
}

} // namespace detail

/// Cross-validates every (K, gamma) pair along a warm-started lambda path
/// computed on the full data. Folds run concurrently; the report is
/// independent of scheduling.
template <ColumnDesign D>
CvReport grid_search(const D& x, std::span<const int> y, const CvGrid& grid, const FitOptions& options,
                     std::uint64_t seed, CvLoss loss = CvLoss::Deviance, unsigned threads = 0)
{
    grid.validate();
    detail::require(y.size() == x.rows(), ErrorKind::DimensionMismatch, "label count differs from row count");
    std::vector<int> ks = grid.k_values;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    std::vector<double> gammas = grid.gamma_values;
    std::sort(gammas.begin(), gammas.end());
    gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());
    // The smallest gamma has the highest all-zero level, so its path covers every gamma.
    const std::vector<double> lambdas =
        grid.lambda.values.empty() ? lambda_path(x, y, grid.lambda.count, grid.lambda.ratio, gammas.front(), options)
                                   : grid.lambda.values;

    struct Task {
        std::size_t k_index;
        std::size_t gamma_index;
        std::size_t fold;
    };
    std::vector<std::vector<detail::FoldData>> folds;
    std::vector<Task> tasks;
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        const auto assignment = kfold_split(y, ks[ki], seed);
        folds.push_back(detail::make_folds(y, assignment, ks[ki]));
        for (std::size_t gi = 0; gi < gammas.size(); ++gi)
            for (std::size_t f = 0; f < folds.back().size(); ++f) tasks.push_back({ki, gi, f});
    }
    std::vector<std::vector<double>> losses(tasks.size());
    parallel_for(
        tasks.size(),
        [&](std::size_t t) {
            const auto& task = tasks[t];
            losses[t] = detail::fold_path_losses(x, folds[task.k_index][task.fold], lambdas, gammas[task.gamma_index],
                                                 options, loss);
        },
        threads);

    CvReport report;
    report.lambdas = lambdas;
    std::size_t t = 0;
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
            std::vector<std::vector<double>> sums(lambdas.size());
            std::vector<std::size_t> counts;
            int skipped = 0;
            for (std::size_t f = 0; f < folds[ki].size(); ++f, ++t) {
                if (losses[t].empty()) {
                    ++skipped;
                    continue;
                }
                counts.push_back(folds[ki][f].test.size());
                for (std::size_t l = 0; l < lambdas.size(); ++l) sums[l].push_back(losses[t][l]);
            }
            if (counts.empty()) {
                report.dropped.emplace_back(ks[ki], gammas[gi]);
                continue;
            }
            for (std::size_t l = 0; l < lambdas.size(); ++l) {
                CvEntry e{ks[ki], gammas[gi], lambdas[l], 0.0, {}, skipped};
                detail::finish_entry(e, sums[l], counts);
                report.entries.push_back(std::move(e));
            }
        }
    }
    if (report.entries.empty()) throw Error(ErrorKind::InsufficientData, "every cross-validation fold was skipped");
    for (std::size_t i = 1; i < report.entries.size(); ++i)
        if (detail::better_entry(report.entries[i], report.entries[report.best_index])) report.best_index = i;
    return report;
}

/// Standard error of an entry's mean_error across its folds.
inline double standard_error(const CvEntry& e)
{
    const auto m = e.fold_errors.size();
    if (m < 2) return 0.0;
    double ss = 0.0;
    for (double f : e.fold_errors) ss += (f - e.mean_error) * (f - e.mean_error);
    return std::sqrt(ss / static_cast<double>(m - 1)) / std::sqrt(static_cast<double>(m));
}

/// One-standard-error rule: within the best entry's (K, gamma) slice, the
/// largest lambda whose mean error is at most best + SE(best).
inline std::size_t one_se_index(const CvReport& report)
{
    const CvEntry& best = report.best();
    const double limit = best.mean_error + standard_error(best);
    std::size_t chosen = report.best_index;
    for (std::size_t i = 0; i < report.entries.size(); ++i) {
        const auto& e = report.entries[i];
        if (e.k != best.k || e.gamma != best.gamma) continue;
        if (e.mean_error <= limit && e.lambda > report.entries[chosen].lambda) chosen = i;
    }
    return chosen;
}

/// Columns K, gamma, lambda, mean_error, fold_errors (';'-joined), is_best,
/// skipped_folds.
inline void write_cv_report_csv(std::ostream& out, const CvReport& report)
{
    const auto old_precision = out.precision(17);
    out << "K,gamma,lambda,mean_error,fold_errors,is_best,skipped_folds\n";
    for (std::size_t i = 0; i < report.entries.size(); ++i) {
        const auto& e = report.entries[i];
        out << e.k << ',' << e.gamma << ',' << e.lambda << ',' << e.mean_error << ',';
        for (std::size_t f = 0; f < e.fold_errors.size(); ++f) out << (f ? ";" : "") << e.fold_errors[f];
        out << ',' << (i == report.best_index ? 1 : 0) << ',' << e.skipped_folds << '\n';
    }
    out.precision(old_precision);
}

} // namespace rtl
