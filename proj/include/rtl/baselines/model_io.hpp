#pragma once

// JSON envelopes for the baseline classifiers. Every envelope carries
// model_type and vocabulary_hash; loading checks the hash against the
// supplied vocabulary.

#include <string>
#include <unordered_map>
#include <vector>

#include "../model_io.hpp"
#include "knn.hpp"
#include "naive_bayes.hpp"
#include "svm.hpp"
#include "truncated_lr.hpp"

namespace rtl::baselines {

namespace detail {

inline void check_envelope(const json& j, std::string_view type, std::span<const std::string> vocabulary)
{
    if (j.at("model_type").get<std::string>() != type)
        throw Error(ErrorKind::Schema, "expected model_type '" + std::string(type) + "'");
    if (j.at("vocabulary_hash").get<std::string>() != vocabulary_hash(vocabulary))
        throw Error(ErrorKind::VocabularyMismatch, "model vocabulary hash does not match the supplied vocabulary");
}

template <class F>
auto parse_json(F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Schema, std::string("model json: ") + e.what());
    }
}

} // namespace detail

inline json nb_to_json(const NbModel& m, std::span<const std::string> vocabulary)
{
    rtl::detail::require(m.term_log_likelihoods[0].size() == vocabulary.size(), ErrorKind::DimensionMismatch,
                         "likelihood table differs from vocabulary");
    return {
        {"model_type", "naive_bayes"},
        {"vocabulary_hash", vocabulary_hash(vocabulary)},
        {"vocabulary_size", vocabulary.size()},
        {"smoothing", m.smoothing},
        {"class_log_priors", m.class_log_priors},
        {"term_log_likelihoods", {m.term_log_likelihoods[0], m.term_log_likelihoods[1]}},
    };
}

inline NbModel nb_from_json(const json& j, std::span<const std::string> vocabulary)
{
    return detail::parse_json([&] {
        detail::check_envelope(j, "naive_bayes", vocabulary);
        NbModel m;
        m.smoothing = j.at("smoothing").get<double>();
        m.class_log_priors = j.at("class_log_priors").get<std::array<double, 2>>();
        for (std::size_t c = 0; c < 2; ++c) {
            m.term_log_likelihoods[c] = j.at("term_log_likelihoods").at(c).get<std::vector<double>>();
            if (m.term_log_likelihoods[c].size() != vocabulary.size())
                throw Error(ErrorKind::Schema, "likelihood table differs from vocabulary");
        }
        return m;
    });
}

/// Nonzero weights only, as [[term, weight], ...].
inline json svm_to_json(const SvmModel& m, std::span<const std::string> vocabulary)
{
    json coefs = json::array();
    for (std::size_t j = 0; j < m.weights.size(); ++j)
        if (m.weights[j] != 0.0) coefs.push_back({vocabulary[j], m.weights[j]});
    return {
        {"model_type", "linear_svm"},
        {"vocabulary_hash", vocabulary_hash(vocabulary)},
        {"vocabulary_size", vocabulary.size()},
        {"intercept", m.bias},
        {"coefficients", std::move(coefs)},
        {"cost", m.cost},
    };
}

inline SvmModel svm_from_json(const json& j, std::span<const std::string> vocabulary)
{
    return detail::parse_json([&] {
        detail::check_envelope(j, "linear_svm", vocabulary);
        std::unordered_map<std::string, std::size_t> index;
        for (std::size_t k = 0; k < vocabulary.size(); ++k) index.emplace(vocabulary[k], k);
        SvmModel m;
        m.weights.assign(vocabulary.size(), 0.0);
        m.bias = j.at("intercept").get<double>();
        m.cost = j.at("cost").get<double>();
        for (const auto& entry : j.at("coefficients")) {
            const auto it = index.find(entry.at(0).get<std::string>());
            if (it == index.end()) throw Error(ErrorKind::VocabularyMismatch, "unknown term in model");
            m.weights[it->second] = entry.at(1).get<double>();
        }
        return m;
    });
}

/// KNN is a lazy learner: the envelope records the configuration, and the
/// training matrix travels as its own artifact.
inline json knn_to_json(const KnnConfig& c, std::span<const std::string> vocabulary)
{
    return {
        {"model_type", "knn"},
        {"vocabulary_hash", vocabulary_hash(vocabulary)},
        {"vocabulary_size", vocabulary.size()},
        {"k", c.k},
        {"row_normalization", c.row_normalization == RowNormalization::L2 ? "l2" : "none"},
    };
}

inline KnnConfig knn_from_json(const json& j, std::span<const std::string> vocabulary)
{
    return detail::parse_json([&] {
        detail::check_envelope(j, "knn", vocabulary);
        KnnConfig c;
        c.k = j.at("k").get<int>();
        const auto norm = j.at("row_normalization").get<std::string>();
        if (norm != "l2" && norm != "none") throw Error(ErrorKind::Schema, "unknown row_normalization");
        c.row_normalization = norm == "l2" ? RowNormalization::L2 : RowNormalization::None;
        c.validate();
        return c;
    });
}

/// Same fields as the SCAD model envelope, plus the threshold. The hash is
/// that of the full vocabulary; coefficients name retained terms.
inline json truncated_lr_to_json(const TruncatedLrModel& m, std::span<const std::string> vocabulary)
{
    json j = model_to_json(m.model, "truncated_lr");
    j["vocabulary_hash"] = vocabulary_hash(vocabulary);
    j["vocabulary_size"] = vocabulary.size();
    j["threshold"] = m.threshold;
    json retained = json::array();
    for (auto k : m.retained) retained.push_back(vocabulary[k]);
    j["retained"] = std::move(retained);
    return j;
}

inline TruncatedLrModel truncated_lr_from_json(const json& j, std::span<const std::string> vocabulary)
{
    return detail::parse_json([&] {
        detail::check_envelope(j, "truncated_lr", vocabulary);
        std::unordered_map<std::string, std::size_t> index;
        for (std::size_t k = 0; k < vocabulary.size(); ++k) index.emplace(vocabulary[k], k);
        const double threshold = j.at("threshold").get<double>();
        std::vector<std::size_t> retained;
        auto sub = std::make_shared<std::vector<std::string>>();
        for (const auto& t : j.at("retained")) {
            const auto it = index.find(t.get<std::string>());
            if (it == index.end()) throw Error(ErrorKind::VocabularyMismatch, "unknown retained term");
            retained.push_back(it->second);
            sub->push_back(it->first);
        }
        std::vector<std::int64_t> map(vocabulary.size(), -1);
        for (std::size_t k = 0; k < retained.size(); ++k) map[retained[k]] = static_cast<std::int64_t>(k);
        json inner = j;
        inner["vocabulary_hash"] = vocabulary_hash(*sub);
        auto model = model_from_json(inner, std::move(sub));
        TruncatedLrModel m{threshold, std::move(retained), std::move(map), std::move(model)};
        return m;
    });
}

} // namespace rtl::baselines
