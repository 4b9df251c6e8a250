#pragma once

#include "vngender/classical.hpp"
#include "vngender/data_io.hpp"
#include "vngender/featurize.hpp"
#include "vngender/lstm.hpp"
#include "vngender/names.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vngender {

/// Algorithm plus its hyperparameters. Only the block matching `kind` is used.
struct ModelSpec {
    ModelKind kind = ModelKind::MultinomialNB;
    std::uint64_t seed = 0;
    NaiveBayesConfig nb;
    LogisticConfig logistic;
    SvmConfig svm;
    TreeConfig tree;
    ForestConfig forest;
    LstmTrainConfig lstm;
    /// LSTM only: pretrained vectors; when null an OOV-only table of
    /// `embedding_dim` is created from the model seed.
    std::shared_ptr<const EmbeddingTable> embeddings;
    std::size_t embedding_dim = 300;

    static ModelSpec defaults(ModelKind kind, std::uint64_t seed = 0);
};

/// One column of an experiment table: a model and the features it sees.
struct ExperimentArm {
    ModelSpec model;
    VectorizerConfig vectorizer;

    /// e.g. "svm+count", "bnb+tfidf", "lstm"
    std::string name() const;
    /// Parses "svm:count", "bnb:tfidf", "lstm" (vectorizer defaults to count).
    static ExperimentArm parse(std::string_view text, std::uint64_t seed = 0);
};

/// Name components of one raw name under a mask.
struct SelectedName {
    NameComponents components;
    std::vector<std::string> tokens;
};

/// nullopt when the name normalizes to nothing.
std::optional<SelectedName> select_name(std::string_view raw, ComponentMask mask);

/// A trained model together with everything needed to go from a raw name
/// to a prediction.
struct TrainedPipeline {
    ComponentMask mask = ComponentMask::full();
    ModelKind kind = ModelKind::MultinomialNB;
    std::optional<Vectorizer> vectorizer;      ///< classical models
    std::optional<ClassifierModel> classifier; ///< classical models
    std::optional<LstmModel> lstm;
    std::shared_ptr<const EmbeddingTable> embeddings; ///< LSTM only
    std::size_t skipped_training_records = 0;

    /// Tokens must be the already selected components; must be non-empty.
    Prediction predict_tokens(std::span<const std::string> tokens) const;
};

/// Fits vectorizer (train only) and model. Records whose selected
/// components are empty are skipped and counted.
TrainedPipeline train_pipeline(const Dataset& train, ComponentMask mask, const ExperimentArm& arm);

} // namespace vngender
