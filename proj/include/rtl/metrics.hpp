#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "corpus.hpp"
#include "error.hpp"

namespace rtl {

/// a = true positives, b = false positives, c = false negatives, d = true negatives.
struct ConfusionCounts {
    std::size_t a = 0;
    std::size_t b = 0;
    std::size_t c = 0;
    std::size_t d = 0;

    std::size_t total() const noexcept { return a + b + c + d; }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

inline ConfusionCounts confusion(std::span<const Polarity> predictions, std::span<const Polarity> truths)
{
    detail::require(predictions.size() == truths.size(), ErrorKind::DimensionMismatch,
                    "prediction and truth vectors differ in length");
    detail::require(!predictions.empty(), ErrorKind::InsufficientData, "no predictions");
    ConfusionCounts cc;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool pred_pos = predictions[i] == Polarity::Positive;
        const bool true_pos = truths[i] == Polarity::Positive;
        if (pred_pos && true_pos) ++cc.a;
        else if (pred_pos) ++cc.b;
        else if (true_pos) ++cc.c;
        else ++cc.d;
    }
    return cc;
}

/// A metric value, or NA when its denominator is zero.
using Metric = std::optional<double>;

struct MetricsReport {
    Metric tpr, tnr, ppv, npv, accuracy, f1;
};

inline MetricsReport compute_metrics(const ConfusionCounts& cc)
{
    auto ratio = [](std::size_t num, std::size_t den) -> Metric {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    MetricsReport m;
    m.tpr = ratio(cc.a, cc.a + cc.c);
    m.tnr = ratio(cc.d, cc.b + cc.d);
    m.ppv = ratio(cc.a, cc.a + cc.b);
    m.npv = ratio(cc.d, cc.c + cc.d);
    m.accuracy = ratio(cc.a + cc.d, cc.total());
    if (m.ppv && m.tpr && (*m.ppv + *m.tpr) > 0.0) m.f1 = 2.0 * *m.ppv * *m.tpr / (*m.ppv + *m.tpr);
    return m;
}

inline std::string format_metric(const Metric& m, int digits = 4)
{
    if (!m) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, *m);
    return buf;
}

inline nlohmann::json metric_json(const Metric& m)
{
    return m ? nlohmann::json(*m) : nlohmann::json("NA");
}

struct FeatureCounts {
    std::size_t used = 0;
    std::size_t selected = 0;
};

inline nlohmann::json metrics_to_json(const ConfusionCounts& cc, const MetricsReport& m,
                                      std::optional<FeatureCounts> features = std::nullopt)
{
    nlohmann::json j = {
        {"confusion", {{"a", cc.a}, {"b", cc.b}, {"c", cc.c}, {"d", cc.d}}},
        {"TPR", metric_json(m.tpr)},
        {"TNR", metric_json(m.tnr)},
        {"PPV", metric_json(m.ppv)},
        {"NPV", metric_json(m.npv)},
        {"Accuracy", metric_json(m.accuracy)},
        {"F1", metric_json(m.f1)},
    };
    if (features) {
        j["features_used"] = features->used;
        j["features_selected"] = features->selected;
    }
    return j;
}

/// Aligned two-column table, one metric per row in the order
/// TPR, TNR, PPV, NPV, Accuracy, F1 [, # Features used, # Features selected].
inline void write_metrics_table(std::ostream& out, const MetricsReport& m,
                                std::optional<FeatureCounts> features = std::nullopt)
{
    auto row = [&out](const char* name, const std::string& value) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%-20s %10s\n", name, value.c_str());
        out << buf;
    };
    row("TPR", format_metric(m.tpr));
    row("TNR", format_metric(m.tnr));
    row("PPV", format_metric(m.ppv));
    row("NPV", format_metric(m.npv));
    row("Accuracy", format_metric(m.accuracy));
    row("F1", format_metric(m.f1));
    if (features) {
        row("# Features used", std::to_string(features->used));
        row("# Features selected", std::to_string(features->selected));
    }
}

} // namespace rtl
