#pragma once

#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>

#include "error.hpp"

namespace rtl {

using StopwordSet = std::unordered_set<std::string>;

/// Standard English stop-word list (the Snowball list). Contractions are
/// stored as the fragments punctuation stripping leaves behind ("don't" ->
/// "don", "t").
inline const StopwordSet& default_stopwords()
{
    static const StopwordSet words = {
        "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours",
        "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers",
        "herself", "it", "its", "itself", "they", "them", "their", "theirs", "themselves",
        "what", "which", "who", "whom", "this", "that", "these", "those", "am", "is", "are",
        "was", "were", "be", "been", "being", "have", "has", "had", "having", "do", "does",
        "did", "doing", "would", "should", "could", "ought", "cannot", "a", "an", "the", "and",
        "but", "if", "or", "because", "as", "until", "while", "of", "at", "by", "for", "with",
        "about", "against", "between", "into", "through", "during", "before", "after",
        "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over",
        "under", "again", "further", "then", "once", "here", "there", "when", "where", "why",
        "how", "all", "any", "both", "each", "few", "more", "most", "other", "some", "such",
        "no", "nor", "not", "only", "own", "same", "so", "than", "too", "very",
        // contraction fragments
        "s", "t", "d", "m", "ll", "re", "ve", "isn", "aren", "wasn", "weren", "hasn", "haven",
        "hadn", "doesn", "don", "didn", "wouldn", "shan", "shouldn", "couldn", "mustn", "let",
    };
    return words;
}

/// One word per line; blank lines and lines starting with '#' are ignored.
/// Entries are lowercased and must already be punctuation-free.
inline StopwordSet load_stopwords(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open stop-word file " + path);
    StopwordSet words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
            line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        std::string word = line.substr(start);
        for (char& c : word)
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        words.insert(std::move(word));
    }
    return words;
}

} // namespace rtl
