#include "vngender/featurize.hpp"

#include "vngender/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace vngender {

double SparseVector::weight_of(std::uint32_t index) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), index,
                               [](const Entry& e, std::uint32_t i) { return e.index < i; });
    return it != entries.end() && it->index == index ? it->weight : 0.0;
}

double SparseVector::l1_norm() const {
    double s = 0.0;
    for (const auto& e : entries) s += std::abs(e.weight);
    return s;
}

double SparseVector::l2_norm() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.weight * e.weight;
    return std::sqrt(s);
}

std::string to_string(VectorizerMode m) { return m == VectorizerMode::Count ? "count" : "tfidf"; }

VectorizerMode parse_vectorizer_mode(std::string_view raw) {
    std::string text(raw);
    for (char& ch : text) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (text == "count") return VectorizerMode::Count;
    if (text == "tfidf" || text == "tf-idf") return VectorizerMode::Tfidf;
    throw ConfigError("unknown vectorizer '" + std::string(raw) + "' (expected count or tfidf)");
}

void VectorizerConfig::validate() const {
    if (max_features && *max_features == 0) throw ConfigError("max_features must be at least 1");
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::size_t> doc_freq,
                       std::size_t n_docs)
    : tokens_(std::move(tokens)), doc_freq_(std::move(doc_freq)), n_docs_(n_docs) {
    if (tokens_.size() != doc_freq_.size()) {
        throw FormatError("bad_vocabulary", "vocabulary token and doc-freq columns differ in length");
    }
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (i > 0 && !(tokens_[i - 1] < tokens_[i])) {
            throw FormatError("bad_vocabulary", "vocabulary tokens are not strictly sorted");
        }
        if (doc_freq_[i] < 1 || doc_freq_[i] > n_docs_) {
            throw FormatError("bad_vocabulary", "document frequency out of range for '" + tokens_[i] + "'");
        }
        index_.emplace(tokens_[i], static_cast<std::uint32_t>(i));
    }
}

std::optional<std::uint32_t> Vocabulary::index_of(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

double Vocabulary::idf(std::uint32_t index) const {
    const double n = static_cast<double>(n_docs_);
    const double df = static_cast<double>(doc_freq_.at(index));
    return std::log((1.0 + n) / (1.0 + df)) + 1.0;
}

Vocabulary fit_vocabulary(std::span<const Document> corpus, const VectorizerConfig& cfg) {
    cfg.validate();
    if (corpus.empty()) throw DataError("empty_corpus", "cannot fit a vocabulary on an empty corpus");

    struct Counts {
        std::size_t term = 0;
        std::size_t doc = 0;
    };
    std::map<std::string, Counts> counts;
    for (const auto& doc : corpus) {
        std::map<std::string_view, bool> seen;
        for (const auto& tok : doc) {
            auto& c = counts[tok];
            ++c.term;
            if (!seen[tok]) {
                seen[tok] = true;
                ++c.doc;
            }
        }
    }
    if (counts.empty()) throw DataError("empty_corpus", "every document in the corpus is empty");

    std::vector<std::map<std::string, Counts>::const_iterator> kept;
    kept.reserve(counts.size());
    for (auto it = counts.cbegin(); it != counts.cend(); ++it) kept.push_back(it);
    if (cfg.max_features && kept.size() > *cfg.max_features) {
        // Highest term count first; map order gives the lexicographic tie-break.
        std::stable_sort(kept.begin(), kept.end(),
                         [](auto a, auto b) { return a->second.term > b->second.term; });
        kept.resize(*cfg.max_features);
        std::sort(kept.begin(), kept.end(), [](auto a, auto b) { return a->first < b->first; });
    }

    std::vector<std::string> tokens;
    std::vector<std::size_t> df;
    tokens.reserve(kept.size());
    df.reserve(kept.size());
    for (auto it : kept) {
        tokens.push_back(it->first);
        df.push_back(it->second.doc);
    }
    return Vocabulary(std::move(tokens), std::move(df), corpus.size());
}

namespace {

std::map<std::uint32_t, double> term_counts(std::span<const std::string> doc, const Vocabulary& v) {
    std::map<std::uint32_t, double> tf;
    for (const auto& tok : doc) {
        if (auto idx = v.index_of(tok)) tf[*idx] += 1.0;
    }
    return tf;
}

} // namespace

SparseVector transform_count(std::span<const std::string> doc, const Vocabulary& v) {
    SparseVector out;
    for (const auto& [idx, count] : term_counts(doc, v)) out.entries.push_back({idx, count});
    return out;
}

SparseVector transform_tfidf(std::span<const std::string> doc, const Vocabulary& v) {
    SparseVector out;
    for (const auto& [idx, count] : term_counts(doc, v)) out.entries.push_back({idx, count * v.idf(idx)});
    const double norm = out.l2_norm();
    if (norm > 0.0) {
        for (auto& e : out.entries) e.weight /= norm;
    }
    return out;
}

Vectorizer Vectorizer::fit(std::span<const Document> corpus, const VectorizerConfig& cfg) {
    return {cfg, fit_vocabulary(corpus, cfg)};
}

SparseVector Vectorizer::transform(std::span<const std::string> doc) const {
    return config.mode == VectorizerMode::Count ? transform_count(doc, vocabulary)
                                                : transform_tfidf(doc, vocabulary);
}

} // namespace vngender
