#pragma once

#include "vngender/classical.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vngender {

/// Token vectors of a fixed width. Tokens missing from the table get a
/// vector drawn from uniform[-0.05, 0.05], seeded by (oov_seed, token), and
/// cached; the draw does not depend on lookup order.
class EmbeddingTable {
public:
    explicit EmbeddingTable(std::size_t dim, std::uint64_t oov_seed = 0);
    EmbeddingTable(const EmbeddingTable&) = delete;
    EmbeddingTable& operator=(const EmbeddingTable&) = delete;

    std::size_t dim() const { return dim_; }
    std::uint64_t oov_seed() const { return oov_seed_; }
    /// Number of stored (non-OOV) vectors.
    std::size_t size() const { return vectors_.size(); }
    bool contains(std::string_view token) const;

    /// Returns false and keeps the existing vector when the token is present.
    bool insert(std::string token, Eigen::VectorXd vec);

    /// Thread-safe; references stay valid for the table's lifetime.
    const Eigen::VectorXd& lookup(std::string_view token) const;

    /// Where the vectors came from; empty path means OOV-only.
    std::filesystem::path source_path;
    std::uint64_t content_hash = 0;

private:
    std::size_t dim_;
    std::uint64_t oov_seed_;
    std::unordered_map<std::string, Eigen::VectorXd> vectors_;
    mutable std::mutex oov_mutex_;
    mutable std::unordered_map<std::string, Eigen::VectorXd> oov_cache_;
};

/// Parses the text vector format: "<count> <dim>" header, then one token
/// and `dim` reals per line. Duplicate tokens keep the first vector and add
/// a warning. Throws FormatError naming the offending line.
std::unique_ptr<EmbeddingTable> parse_embeddings(std::istream& in, std::size_t expected_dim,
                                                 std::uint64_t oov_seed = 0,
                                                 std::vector<std::string>* warnings = nullptr);
std::unique_ptr<EmbeddingTable> load_embeddings(const std::filesystem::path& path, std::size_t expected_dim,
                                                std::uint64_t oov_seed = 0,
                                                std::vector<std::string>* warnings = nullptr);
/// FNV-1a 64 of the file bytes.
std::uint64_t file_content_hash(const std::filesystem::path& path);

/// Single-layer LSTM with a logistic read-out of the last hidden state.
/// Gate order everywhere: input, forget, output, cell candidate.
struct LstmParams {
    std::array<Eigen::MatrixXd, 4> W; ///< H x dim
    std::array<Eigen::MatrixXd, 4> U; ///< H x H
    std::array<Eigen::VectorXd, 4> b; ///< H
    Eigen::VectorXd v;                ///< H
    double c = 0.0;

    static constexpr int kInput = 0;
    static constexpr int kForget = 1;
    static constexpr int kOutput = 2;
    static constexpr int kCell = 3;

    static LstmParams zeros(std::size_t input_dim, std::size_t hidden);
    /// uniform[-0.1, 0.1] everywhere except the forget bias, which starts at 1.
    static LstmParams random_init(std::size_t input_dim, std::size_t hidden, std::uint64_t seed);

    std::size_t hidden() const { return static_cast<std::size_t>(v.size()); }
    std::size_t input_dim() const { return static_cast<std::size_t>(W[0].cols()); }
    std::size_t parameter_count() const;

    /// Flat copy in a fixed order: W[0..3], U[0..3], b[0..3], v, c.
    std::vector<double> flatten() const;
    void assign(std::span<const double> flat);

    /// Shapes consistent and every entry finite; throws FormatError.
    void validate() const;
    bool all_finite() const;

    friend bool operator==(const LstmParams& a, const LstmParams& b);
};

struct LstmTrainConfig {
    std::size_t hidden = 128;
    std::size_t batch_size = 32;
    std::size_t epochs = 2;
    double learning_rate = 0.5;
    std::size_t max_seq_len = 8;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SequenceExample {
    std::vector<std::string> tokens;
    int label = 0;
};

struct LstmModel {
    LstmParams params;
    LstmTrainConfig config;
    std::vector<double> epoch_loss; ///< mean training loss seen in each epoch
};

/// Keeps the last `max_len` tokens, so the given name always survives.
std::span<const std::string> truncate_left(std::span<const std::string> tokens, std::size_t max_len);

/// P(label = 1). Throws DataError on an empty sequence.
double lstm_forward(std::span<const std::string> tokens, const EmbeddingTable& emb, const LstmParams& p,
                    std::size_t max_seq_len = 8);

/// Binary cross-entropy of one sequence; adds dLoss/dParams into `grad`
/// when given (grad must be shaped like p, e.g. LstmParams::zeros).
double lstm_sequence_loss(std::span<const std::string> tokens, int label, const EmbeddingTable& emb,
                          const LstmParams& p, LstmParams* grad, std::size_t max_seq_len = 8);

/// Mean loss over the examples; `grad` receives the mean gradient.
double lstm_batch_loss(std::span<const SequenceExample> batch, const EmbeddingTable& emb,
                       const LstmParams& p, LstmParams* grad, std::size_t max_seq_len = 8);

/// Mini-batch SGD with BPTT; embeddings stay frozen. `init` overrides the
/// seeded random initialization.
LstmModel train_lstm(std::span<const SequenceExample> data, const EmbeddingTable& emb,
                     const LstmTrainConfig& cfg, std::optional<LstmParams> init = std::nullopt);

Prediction predict_lstm(std::span<const std::string> tokens, const EmbeddingTable& emb, const LstmParams& p,
                        std::size_t max_seq_len = 8);

} // namespace vngender
