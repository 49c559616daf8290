#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "../corpus.hpp"
#include "../dtm.hpp"
#include "../error.hpp"
#include "../model_selection.hpp"

namespace rtl::baselines {

enum class RowNormalization { L2, None };

struct KnnConfig {
    int k = 1;
    RowNormalization row_normalization = RowNormalization::L2;

    void validate() const { rtl::detail::require(k >= 1, ErrorKind::Parameter, "k must be >= 1"); }
};

/// Training rows held for Euclidean nearest-neighbor voting.
class KnnIndex {
public:
    KnnIndex(const DocumentTermMatrix& train, std::span<const int> labels, KnnConfig config)
        : config_(config), p_(train.cols()), labels_(labels.begin(), labels.end())
    {
        config_.validate();
        rtl::detail::require(train.rows() > 0, ErrorKind::InsufficientData, "empty training set");
        rtl::detail::require(labels.size() == train.rows(), ErrorKind::DimensionMismatch, "label count differs from row count");
        rtl::detail::require(static_cast<std::size_t>(config_.k) <= train.rows(), ErrorKind::Parameter,
                        "k exceeds the training set size");
        row_ptr_.push_back(0);
        for (std::size_t i = 0; i < train.rows(); ++i) {
            const auto r = train.row(i);
            const double scale = norm_scale(r);
            double sq = 0.0;
            for (std::size_t e = 0; e < r.size(); ++e) {
                const double v = r.value[e] * scale;
                index_.push_back(r.index[e]);
                values_.push_back(v);
                sq += v * v;
            }
            sq_norms_.push_back(sq);
            row_ptr_.push_back(values_.size());
        }
    }

    std::size_t size() const noexcept { return labels_.size(); }
    const KnnConfig& config() const noexcept { return config_; }

    /// Squared distances from the (normalized) query to every training row.
    std::vector<double> distances(const SparseRowView& query) const
    {
        std::vector<double> dense(p_, 0.0);
        const double scale = norm_scale(query);
        double q_sq = 0.0;
        for (std::size_t e = 0; e < query.size(); ++e) {
            if (query.index[e] >= p_) continue;
            const double v = query.value[e] * scale;
            dense[query.index[e]] = v;
            q_sq += v * v;
        }
        std::vector<double> d(size());
        for (std::size_t i = 0; i < size(); ++i) {
            double dot = 0.0;
            for (auto e = row_ptr_[i]; e < row_ptr_[i + 1]; ++e) dot += values_[e] * dense[index_[e]];
            d[i] = std::max(0.0, q_sq + sq_norms_[i] - 2.0 * dot);
        }
        return d;
    }

    /// Majority label among the k nearest rows (distance ties -> lower row
    /// index); a tied vote takes the nearest neighbor's label.
    Polarity predict(const SparseRowView& query) const
    {
        const int k = config_.k;
        return predict_many(query, std::span(&k, 1)).front();
    }

    /// One prediction per requested k from a single distance pass.
    std::vector<Polarity> predict_many(const SparseRowView& query, std::span<const int> ks) const
    {
        std::size_t k_max = 0;
        for (int k : ks) {
            rtl::detail::require(k >= 1 && static_cast<std::size_t>(k) <= size(), ErrorKind::Parameter,
                            "k outside 1..training set size");
            k_max = std::max(k_max, static_cast<std::size_t>(k));
        }
        const auto d = distances(query);
        std::vector<std::size_t> order(size());
        std::iota(order.begin(), order.end(), 0);
        auto closer = [&d](std::size_t a, std::size_t b) { return d[a] != d[b] ? d[a] < d[b] : a < b; };
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_max), order.end(), closer);
        std::vector<Polarity> out;
        out.reserve(ks.size());
        for (int kk : ks) {
            const auto k = static_cast<std::size_t>(kk);
            std::size_t pos = 0;
            for (std::size_t m = 0; m < k; ++m) pos += static_cast<std::size_t>(labels_[order[m]]);
            const std::size_t neg = k - pos;
            if (pos != neg) out.push_back(pos > neg ? Polarity::Positive : Polarity::Negative);
            else out.push_back(polarity_from_int(labels_[order[0]]));
        }
        return out;
    }

private:
    double norm_scale(const SparseRowView& r) const
    {
        if (config_.row_normalization == RowNormalization::None) return 1.0;
        double sq = 0.0;
        for (double v : r.value) sq += v * v;
        return sq > 0.0 ? 1.0 / std::sqrt(sq) : 1.0;
    }

    KnnConfig config_;
    std::size_t p_;
    std::vector<int> labels_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::uint32_t> index_;
    std::vector<double> values_;
    std::vector<double> sq_norms_;
};

inline Polarity knn_predict(const DocumentTermMatrix& train, std::span<const int> labels, const SparseRowView& query,
                            const KnnConfig& config)
{
    return KnnIndex(train, labels, config).predict(query);
}

/// Odd k in 1..25.
inline std::vector<int> default_knn_candidates()
{
    std::vector<int> ks;
    for (int k = 1; k <= 25; k += 2) ks.push_back(k);
    return ks;
}

/// Picks k by stratified K-fold misclassification rate; ties go to the smaller k.
inline int knn_select_k(const DocumentTermMatrix& train, std::span<const int> labels, std::span<const int> candidates,
                        int folds, std::uint64_t seed, RowNormalization normalization = RowNormalization::L2)
{
    rtl::detail::require(!candidates.empty(), ErrorKind::Parameter, "no k candidates");
    const auto assignment = kfold_split(labels, folds, seed);
    std::vector<double> errors(candidates.size(), 0.0);
    for (int f = 0; f < folds; ++f) {
        std::vector<std::size_t> tr, te;
        std::vector<int> ytr;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (assignment[i] == f) te.push_back(i);
            else {
                tr.push_back(i);
                ytr.push_back(labels[i]);
            }
        }
        const auto train_part = train.select_rows(tr);
        const KnnIndex index(train_part, ytr, {1, normalization});
        std::vector<int> ks;
        for (int k : candidates) ks.push_back(std::min<int>(k, static_cast<int>(tr.size())));
        for (auto i : te) {
            const auto preds = index.predict_many(train.row(i), ks);
            for (std::size_t c = 0; c < candidates.size(); ++c)
                if (to_int(preds[c]) != labels[i]) errors[c] += 1.0;
        }
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < candidates.size(); ++c)
        if (errors[c] < errors[best] || (errors[c] == errors[best] && candidates[c] < candidates[best])) best = c;
    return candidates[best];
}

} // namespace rtl::baselines
