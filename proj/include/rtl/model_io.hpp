#pragma once

#include <fstream>
#include <memory>
#include <string>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "dtm.hpp"
#include "error.hpp"
#include "solver.hpp"

namespace rtl {

using json = nlohmann::json;

/// {model_type, intercept, coefficients: [[term, value], ...], lambda, gamma,
///  weighting, vocabulary_hash, vocabulary_size, converged, outer_iterations}
inline json model_to_json(const ScadModel& model, std::string_view model_type = "rtl")
{
    json coefs = json::array();
    for (const auto& c : model.coefficients()) coefs.push_back({model.vocabulary()[c.index], c.value});
    return {
        {"model_type", model_type},
        {"intercept", model.intercept()},
        {"coefficients", std::move(coefs)},
        {"lambda", model.params().lambda()},
        {"gamma", model.params().gamma()},
        {"weighting", to_string(model.weighting())},
        {"vocabulary_hash", vocabulary_hash(model.vocabulary())},
        {"vocabulary_size", model.vocabulary().size()},
        {"converged", model.converged()},
        {"outer_iterations", model.outer_iterations()},
    };
}

/// Rebinds a serialized model to `vocabulary`; the stored hash must match.
inline ScadModel model_from_json(const json& j, std::shared_ptr<const std::vector<std::string>> vocabulary)
{
    detail::require(vocabulary != nullptr, ErrorKind::Parameter, "vocabulary required");
    try {
        if (j.at("vocabulary_hash").get<std::string>() != vocabulary_hash(*vocabulary))
            throw Error(ErrorKind::VocabularyMismatch, "model vocabulary hash does not match the supplied vocabulary");
        std::unordered_map<std::string, std::uint32_t> index;
        for (std::size_t k = 0; k < vocabulary->size(); ++k) index.emplace((*vocabulary)[k], static_cast<std::uint32_t>(k));
        std::vector<Coefficient> coefs;
        for (const auto& entry : j.at("coefficients")) {
            const auto term = entry.at(0).get<std::string>();
            const auto it = index.find(term);
            if (it == index.end()) throw Error(ErrorKind::VocabularyMismatch, "unknown term '" + term + "' in model");
            coefs.push_back({it->second, entry.at(1).get<double>()});
        }
        return ScadModel(j.at("intercept").get<double>(), std::move(coefs), std::move(vocabulary),
                         ScadParams(j.at("lambda").get<double>(), j.at("gamma").get<double>()),
                         weighting_from_string(j.at("weighting").get<std::string>()),
                         j.value("converged", true), j.value("outer_iterations", 0));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Schema, std::string("model json: ") + e.what());
    }
}

inline json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Schema, path + ": " + e.what());
    }
}

inline void write_json_file(const std::string& path, const json& j)
{
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
    out << j.dump(2) << '\n';
}

inline std::vector<std::string> read_vocabulary(const std::string& path)
{
    const json j = read_json_file(path);
    if (!j.is_array()) throw Error(ErrorKind::Schema, path + ": vocabulary must be a JSON array");
    return j.get<std::vector<std::string>>();
}

} // namespace rtl
