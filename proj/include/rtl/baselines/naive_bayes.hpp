#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "../corpus.hpp"
#include "../dtm.hpp"
#include "../error.hpp"

namespace rtl::baselines {

/// Multinomial naive Bayes over raw term counts with additive smoothing.
/// Index 0 is Negative, 1 is Positive.
struct NbModel {
    std::array<double, 2> class_log_priors{};
    std::array<std::vector<double>, 2> term_log_likelihoods;
    double smoothing = 1.0;
};

/// Pr(term | class) = (count + alpha) / (class total + alpha * p).
inline NbModel nb_fit(const DocumentTermMatrix& dtm, std::span<const int> labels, double smoothing = 1.0)
{
    rtl::detail::require(dtm.weighting() == Weighting::Frequency, ErrorKind::Parameter,
                    "naive Bayes needs a Frequency-weighted matrix");
    rtl::detail::require(labels.size() == dtm.rows(), ErrorKind::DimensionMismatch, "label count differs from row count");
    rtl::detail::require(smoothing > 0.0, ErrorKind::Parameter, "smoothing must be > 0");
    const std::size_t p = dtm.cols();
    std::array<std::vector<double>, 2> counts{std::vector<double>(p, 0.0), std::vector<double>(p, 0.0)};
    std::array<double, 2> docs{0.0, 0.0};
    std::array<double, 2> totals{0.0, 0.0};
    for (std::size_t i = 0; i < dtm.rows(); ++i) {
        const int c = labels[i] ? 1 : 0;
        docs[static_cast<std::size_t>(c)] += 1.0;
        const auto r = dtm.row(i);
        for (std::size_t e = 0; e < r.size(); ++e) {
            counts[static_cast<std::size_t>(c)][r.index[e]] += r.value[e];
            totals[static_cast<std::size_t>(c)] += r.value[e];
        }
    }
    rtl::detail::require(docs[0] > 0 && docs[1] > 0, ErrorKind::DegenerateLabels, "both classes must be present");

    NbModel m;
    m.smoothing = smoothing;
    const double n = docs[0] + docs[1];
    for (std::size_t c = 0; c < 2; ++c) {
        m.class_log_priors[c] = std::log(docs[c] / n);
        const double denom = std::log(totals[c] + smoothing * static_cast<double>(p));
        m.term_log_likelihoods[c].resize(p);
        for (std::size_t j = 0; j < p; ++j) m.term_log_likelihoods[c][j] = std::log(counts[c][j] + smoothing) - denom;
    }
    return m;
}

/// Unnormalized log posteriors: log prior + sum_j count_j log Pr(term_j | class).
inline std::array<double, 2> nb_log_posteriors(const NbModel& model, const SparseRowView& row)
{
    std::array<double, 2> out = model.class_log_priors;
    const auto p = model.term_log_likelihoods[0].size();
    for (std::size_t e = 0; e < row.size(); ++e) {
        if (row.index[e] >= p) continue;
        for (std::size_t c = 0; c < 2; ++c) out[c] += row.value[e] * model.term_log_likelihoods[c][row.index[e]];
    }
    return out;
}

/// Maximum posterior class; ties go to Positive.
inline Polarity nb_predict(const NbModel& model, const SparseRowView& row)
{
    const auto post = nb_log_posteriors(model, row);
    return post[1] >= post[0] ? Polarity::Positive : Polarity::Negative;
}

} // namespace rtl::baselines
