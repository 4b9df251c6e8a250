#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vngender {

using Document = std::vector<std::string>;

/// Sparse non-negative feature vector; indices strictly increasing, no
/// stored zeros.
struct SparseVector {
    struct Entry {
        std::uint32_t index = 0;
        double weight = 0.0;
        friend bool operator==(const Entry&, const Entry&) = default;
    };
    std::vector<Entry> entries;

    bool empty() const { return entries.empty(); }
    std::size_t nnz() const { return entries.size(); }
    double weight_of(std::uint32_t index) const;
    double l1_norm() const;
    double l2_norm() const;

    friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

enum class VectorizerMode : std::uint8_t { Count = 0, Tfidf = 1 };

std::string to_string(VectorizerMode m);
VectorizerMode parse_vectorizer_mode(std::string_view text);

struct VectorizerConfig {
    VectorizerMode mode = VectorizerMode::Count;
    std::optional<std::size_t> max_features;

    static VectorizerConfig count() { return {VectorizerMode::Count, std::nullopt}; }
    /// The TF-IDF setup used for the experiments: capped at 4,000 features.
    static VectorizerConfig tfidf(std::optional<std::size_t> cap = 4000) {
        return {VectorizerMode::Tfidf, cap};
    }

    void validate() const;
    friend bool operator==(const VectorizerConfig&, const VectorizerConfig&) = default;
};

/// Token to dense index map with document frequencies from the fitting corpus.
class Vocabulary {
public:
    Vocabulary() = default;
    /// Rebuild from persisted columns; validates the invariants.
    Vocabulary(std::vector<std::string> tokens, std::vector<std::size_t> doc_freq, std::size_t n_docs);

    std::size_t size() const { return tokens_.size(); }
    std::size_t n_docs() const { return n_docs_; }
    std::optional<std::uint32_t> index_of(std::string_view token) const;
    const std::string& token(std::uint32_t index) const { return tokens_.at(index); }
    std::size_t doc_freq(std::uint32_t index) const { return doc_freq_.at(index); }
    const std::vector<std::string>& tokens() const { return tokens_; }
    const std::vector<std::size_t>& doc_freqs() const { return doc_freq_; }
    /// Smoothed idf: ln((1 + N) / (1 + df)) + 1.
    double idf(std::uint32_t index) const;

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.tokens_ == b.tokens_ && a.doc_freq_ == b.doc_freq_ && a.n_docs_ == b.n_docs_;
    }

private:
    std::vector<std::string> tokens_; // lexicographic order == index order
    std::vector<std::size_t> doc_freq_;
    std::size_t n_docs_ = 0;
    std::unordered_map<std::string, std::uint32_t> index_;
};

/// Throws DataError when the corpus is empty or every document is empty.
Vocabulary fit_vocabulary(std::span<const Document> corpus, const VectorizerConfig& cfg);

SparseVector transform_count(std::span<const std::string> doc, const Vocabulary& v);
SparseVector transform_tfidf(std::span<const std::string> doc, const Vocabulary& v);

/// Vocabulary plus the mode that selects the transform.
struct Vectorizer {
    VectorizerConfig config;
    Vocabulary vocabulary;

    static Vectorizer fit(std::span<const Document> corpus, const VectorizerConfig& cfg);
    SparseVector transform(std::span<const std::string> doc) const;
    std::size_t n_features() const { return vocabulary.size(); }
};

} // namespace vngender
