#pragma once

#include "vngender/featurize.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vngender {

enum class ModelKind : std::uint8_t {
    MultinomialNB = 0,
    BernoulliNB = 1,
    LogisticRegression = 2,
    LinearSvm = 3,
    DecisionTree = 4,
    RandomForest = 5,
    Lstm = 6,
};

/// Short CLI names: mnb, bnb, lr, svm, tree, forest, lstm.
std::string to_string(ModelKind k);
/// Human-readable table name, e.g. "Multinomial NB".
std::string display_name(ModelKind k);
ModelKind parse_model_kind(std::string_view text);
inline constexpr std::array kClassicalKinds = {
    ModelKind::MultinomialNB, ModelKind::BernoulliNB,  ModelKind::LogisticRegression,
    ModelKind::LinearSvm,     ModelKind::DecisionTree, ModelKind::RandomForest,
};

/// Free-form training metadata persisted with a model (config, seed, ...).
using TrainMeta = std::map<std::string, std::string>;

struct LabeledMatrix {
    std::vector<SparseVector> rows;
    std::vector<int> labels;
    std::size_t n_features = 0;

    std::size_t size() const { return rows.size(); }
    /// Shapes, label domain and index bounds; throws DataError.
    void validate() const;
};

struct Prediction {
    int label = 1;
    /// Probability of label 1 for NB, LR and forest; signed margin for the
    /// SVM; leaf purity for a single tree.
    double score = 0.5;
};

struct NaiveBayesParams {
    std::array<double, 2> log_prior{};
    /// Multinomial: log P(token | class). Bernoulli: log P(present | class).
    std::array<std::vector<double>, 2> log_prob;
    /// Bernoulli only: log P(absent | class) per feature, and its sum.
    std::array<std::vector<double>, 2> log_absent;
    std::array<double, 2> log_absent_total{};
};

struct LinearParams {
    std::vector<double> weights;
    double bias = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
    /// LR: loss per iteration. SVM: primal objective after each epoch.
    std::vector<double> objective_trace;
};

struct TreeNode {
    std::int32_t feature = -1; ///< -1 marks a leaf
    double threshold = 0.0;    ///< go right when x[feature] >= threshold
    std::int32_t left = -1;
    std::int32_t right = -1;
    int label = 1;
    double purity = 1.0;
    std::uint32_t n_samples = 0;

    bool is_leaf() const { return feature < 0; }
};

struct TreeParams {
    std::vector<TreeNode> nodes; ///< nodes[0] is the root; children follow parents

    const TreeNode& leaf_for(const SparseVector& x) const;
    std::size_t depth() const;
    /// Proper binary tree: every non-root node has exactly one parent with
    /// a smaller index. Throws FormatError.
    void validate(std::size_t n_features) const;
};

struct ForestParams {
    std::vector<TreeParams> trees;
    std::vector<std::uint64_t> tree_seeds;
};

struct ClassifierModel {
    ModelKind kind = ModelKind::MultinomialNB;
    std::size_t n_features = 0;
    std::variant<NaiveBayesParams, LinearParams, TreeParams, ForestParams> params;
    TrainMeta train_meta;
};

struct NaiveBayesConfig {
    double alpha = 1.0;
};

struct LogisticConfig {
    double l2 = 1e-4;
    double learning_rate = 0.1;
    std::size_t max_iter = 1000;
    double tol = 1e-6;
};

struct SvmConfig {
    double c = 1.0;
    /// Step at update t is learning_rate / t; 1 is the Pegasos schedule.
    double learning_rate = 1.0;
    std::size_t epochs = 10;
    std::uint64_t seed = 0;
};

struct TreeConfig {
    std::optional<std::size_t> max_depth;
    std::size_t min_leaf = 1;
    std::uint64_t seed = 0;
};

struct ForestConfig {
    std::size_t n_trees = 100;
    std::optional<std::size_t> mtry; ///< defaults to ceil(sqrt(n_features))
    bool bootstrap = true;
    std::optional<std::size_t> max_depth;
    std::size_t min_leaf = 1;
    std::uint64_t seed = 0;
    /// Worker threads; 0 picks the hardware concurrency. Output does not
    /// depend on this value.
    std::size_t threads = 0;
};

ClassifierModel fit_multinomial_nb(const LabeledMatrix& data, double alpha = 1.0);
ClassifierModel fit_bernoulli_nb(const LabeledMatrix& data, double alpha = 1.0);
ClassifierModel fit_logistic_regression(const LabeledMatrix& data, const LogisticConfig& cfg = {});
ClassifierModel fit_linear_svm(const LabeledMatrix& data, const SvmConfig& cfg = {});
ClassifierModel fit_decision_tree(const LabeledMatrix& data, const TreeConfig& cfg = {});
ClassifierModel fit_random_forest(const LabeledMatrix& data, const ForestConfig& cfg = {});

/// Throws DataError when an index in x is >= model.n_features.
Prediction predict(const ClassifierModel& model, const SparseVector& x);

// ---- pieces exposed for gradient checks and oracles ----

struct LogisticObjective {
    double loss = 0.0; ///< mean log-loss + (l2/2)·||w||²
    std::vector<double> grad_w;
    double grad_b = 0.0;
};

LogisticObjective logistic_objective(const LabeledMatrix& data, std::span<const double> w, double b,
                                     double l2);

/// (1/2)·||w||² + c·Σ max(0, 1 − y·(w·x + b)) with y in {−1, +1}.
double svm_objective(const LabeledMatrix& data, std::span<const double> w, double b, double c);

struct SplitChoice {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double weighted_gini = 0.0;
};

/// Best Gini split over all features for the given rows (with multiplicity),
/// or feature == -1 when no split leaves min_leaf rows on both sides.
SplitChoice best_gini_split(const LabeledMatrix& data, std::span<const std::uint32_t> rows,
                            std::size_t min_leaf = 1);

double dot(const SparseVector& x, std::span<const double> w);

} // namespace vngender
