#include "vngender/classical.hpp"

#include "vngender/error.hpp"

#include <cmath>

namespace vngender {

std::string to_string(ModelKind k) {
    switch (k) {
    case ModelKind::MultinomialNB: return "mnb";
    case ModelKind::BernoulliNB: return "bnb";
    case ModelKind::LogisticRegression: return "lr";
    case ModelKind::LinearSvm: return "svm";
    case ModelKind::DecisionTree: return "tree";
    case ModelKind::RandomForest: return "forest";
    case ModelKind::Lstm: return "lstm";
    }
    return "unknown";
}

std::string display_name(ModelKind k) {
    switch (k) {
    case ModelKind::MultinomialNB: return "Multinomial NB";
    case ModelKind::BernoulliNB: return "Bernoulli NB";
    case ModelKind::LogisticRegression: return "Logistic Regression";
    case ModelKind::LinearSvm: return "Support Vector Machine";
    case ModelKind::DecisionTree: return "Decision Tree";
    case ModelKind::RandomForest: return "Random Forest";
    case ModelKind::Lstm: return "LSTM";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view text) {
    for (int i = 0; i <= static_cast<int>(ModelKind::Lstm); ++i) {
        auto k = static_cast<ModelKind>(i);
        if (text == to_string(k)) return k;
    }
    throw ConfigError("unknown model kind '" + std::string(text) +
                      "' (expected mnb, bnb, lr, svm, tree, forest or lstm)");
}

void LabeledMatrix::validate() const {
    if (rows.size() != labels.size()) {
        throw DataError("shape_mismatch", "feature rows and labels differ in length");
    }
    if (rows.empty()) throw DataError("dataset_empty", "training matrix has no rows");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw DataError("bad_label", "label at row " + std::to_string(i) + " is not 0 or 1");
        }
        for (const auto& e : rows[i].entries) {
            if (e.index >= n_features) {
                throw DataError("feature_out_of_range", "row " + std::to_string(i) + " has feature index " +
                                                            std::to_string(e.index) + " >= " +
                                                            std::to_string(n_features));
            }
        }
    }
}

double dot(const SparseVector& x, std::span<const double> w) {
    double s = 0.0;
    for (const auto& e : x.entries) s += w[e.index] * e.weight;
    return s;
}

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Prediction predict_nb(const ClassifierModel& m, const NaiveBayesParams& p, const SparseVector& x) {
    std::array<double, 2> log_joint = p.log_prior;
    if (m.kind == ModelKind::MultinomialNB) {
        for (int c = 0; c < 2; ++c) {
            for (const auto& e : x.entries) log_joint[c] += e.weight * p.log_prob[c][e.index];
        }
    } else {
        for (int c = 0; c < 2; ++c) {
            log_joint[c] += p.log_absent_total[c];
            for (const auto& e : x.entries) {
                if (e.weight > 0) log_joint[c] += p.log_prob[c][e.index] - p.log_absent[c][e.index];
            }
        }
    }
    const double p1 = sigmoid(log_joint[1] - log_joint[0]);
    return {p1 >= 0.5 ? 1 : 0, p1};
}

} // namespace

Prediction predict(const ClassifierModel& model, const SparseVector& x) {
    for (const auto& e : x.entries) {
        if (e.index >= model.n_features) {
            throw DataError("feature_out_of_range", "feature index " + std::to_string(e.index) +
                                                        " out of range for a model with " +
                                                        std::to_string(model.n_features) + " features");
        }
    }
    switch (model.kind) {
    case ModelKind::MultinomialNB:
    case ModelKind::BernoulliNB:
        return predict_nb(model, std::get<NaiveBayesParams>(model.params), x);
    case ModelKind::LogisticRegression: {
        const auto& p = std::get<LinearParams>(model.params);
        const double prob = sigmoid(dot(x, p.weights) + p.bias);
        return {prob >= 0.5 ? 1 : 0, prob};
    }
    case ModelKind::LinearSvm: {
        const auto& p = std::get<LinearParams>(model.params);
        const double margin = dot(x, p.weights) + p.bias;
        return {margin >= 0.0 ? 1 : 0, margin};
    }
    case ModelKind::DecisionTree: {
        const auto& leaf = std::get<TreeParams>(model.params).leaf_for(x);
        return {leaf.label, leaf.purity};
    }
    case ModelKind::RandomForest: {
        const auto& p = std::get<ForestParams>(model.params);
        std::size_t votes = 0;
        for (const auto& t : p.trees) votes += t.leaf_for(x).label == 1;
        const double frac = static_cast<double>(votes) / static_cast<double>(p.trees.size());
        return {2 * votes >= p.trees.size() ? 1 : 0, frac};
    }
    case ModelKind::Lstm: break;
    }
    throw ConfigError("predict() does not handle LSTM models; use predict_lstm()");
}

} // namespace vngender
