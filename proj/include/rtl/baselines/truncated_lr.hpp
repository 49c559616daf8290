#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "../dtm.hpp"
#include "../error.hpp"
#include "../solver.hpp"

namespace rtl::baselines {

/// Unpenalized logistic regression on the terms that survive a sparsity cutoff.
struct TruncatedLrModel {
    double threshold = 0.0;
    std::vector<std::size_t> retained;   // original column indices, ascending
    std::vector<std::int64_t> column_map; // original index -> position in retained, or -1
    ScadModel model;

    double predict_proba(const SparseRowView& row) const
    {
        double eta = model.intercept();
        for (std::size_t e = 0; e < row.size(); ++e) {
            if (row.index[e] >= column_map.size()) continue;
            const auto k = column_map[row.index[e]];
            if (k >= 0) eta += model.coefficient(static_cast<std::size_t>(k)) * row.value[e];
        }
        return rtl::detail::sigmoid(eta);
    }

    Polarity predict(const SparseRowView& row, double cutoff = 0.5) const
    {
        return predict_proba(row) >= cutoff ? Polarity::Positive : Polarity::Negative;
    }
};

/// Solver options for the maximum-likelihood fit: lambda = 0 with |beta| <= 30.
inline FitOptions truncated_lr_options()
{
    FitOptions o;
    o.coefficient_cap = 30.0;
    return o;
}

inline TruncatedLrModel truncated_lr_fit(const DocumentTermMatrix& dtm, std::span<const int> labels,
                                         double sparsity_threshold, const FitOptions& options = truncated_lr_options())
{
    auto retained = sparsity_survivors(dtm, sparsity_threshold);
    if (retained.empty()) throw Error(ErrorKind::DegenerateDesign, "no term survives the sparsity threshold");
    if (retained.size() >= dtm.rows())
        throw Error(ErrorKind::DegenerateDesign, "surviving terms (" + std::to_string(retained.size()) +
                                                     ") must be fewer than documents (" + std::to_string(dtm.rows()) + ")");
    const auto truncated = dtm.select_columns(retained);
    ScadModel model = fit(truncated, labels, ScadParams(0.0, 3.7), options);
    std::vector<std::int64_t> map(dtm.cols(), -1);
    for (std::size_t k = 0; k < retained.size(); ++k) map[retained[k]] = static_cast<std::int64_t>(k);
    return {sparsity_threshold, std::move(retained), std::move(map), std::move(model)};
}

/// Thresholds 0.80, 0.81, ..., 0.99.
inline std::vector<double> default_sparsity_thresholds()
{
    std::vector<double> out;
    for (int t = 80; t <= 99; ++t) out.push_back(t / 100.0);
    return out;
}

} // namespace rtl::baselines
