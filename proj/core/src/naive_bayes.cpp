#include "vngender/classical.hpp"

#include "vngender/error.hpp"

#include <cmath>

namespace vngender {

namespace {

std::array<double, 2> class_counts_checked(const LabeledMatrix& data, double alpha) {
    data.validate();
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be a finite value >= 0");
    std::array<double, 2> n{0.0, 0.0};
    for (int y : data.labels) n[y] += 1.0;
    if (n[0] == 0.0 || n[1] == 0.0) {
        throw DataError("single_class", "naive Bayes needs both labels in the training data");
    }
    return n;
}

double checked_log(double p, const char* what) {
    const double l = std::log(p);
    if (!std::isfinite(l)) {
        throw ConfigError(std::string("zero ") + what + " probability; use alpha > 0");
    }
    return l;
}

} // namespace

ClassifierModel fit_multinomial_nb(const LabeledMatrix& data, double alpha) {
    const auto n = class_counts_checked(data, alpha);
    const std::size_t v = data.n_features;

    NaiveBayesParams p;
    std::array<std::vector<double>, 2> counts{std::vector<double>(v, 0.0), std::vector<double>(v, 0.0)};
    std::array<double, 2> total{0.0, 0.0};
    for (std::size_t i = 0; i < data.size(); ++i) {
        const int y = data.labels[i];
        for (const auto& e : data.rows[i].entries) {
            counts[y][e.index] += e.weight;
            total[y] += e.weight;
        }
    }
    const double n_all = n[0] + n[1];
    for (int c = 0; c < 2; ++c) {
        p.log_prior[c] = std::log(n[c] / n_all);
        p.log_prob[c].resize(v);
        const double denom = total[c] + alpha * static_cast<double>(v);
        for (std::size_t f = 0; f < v; ++f) {
            p.log_prob[c][f] = checked_log((counts[c][f] + alpha) / denom, "token");
        }
    }

    ClassifierModel m;
    m.kind = ModelKind::MultinomialNB;
    m.n_features = v;
    m.params = std::move(p);
    m.train_meta["alpha"] = std::to_string(alpha);
    return m;
}

ClassifierModel fit_bernoulli_nb(const LabeledMatrix& data, double alpha) {
    const auto n = class_counts_checked(data, alpha);
    const std::size_t v = data.n_features;

    std::array<std::vector<double>, 2> present{std::vector<double>(v, 0.0), std::vector<double>(v, 0.0)};
    for (std::size_t i = 0; i < data.size(); ++i) {
        const int y = data.labels[i];
        for (const auto& e : data.rows[i].entries) {
            if (e.weight > 0) present[y][e.index] += 1.0;
        }
    }

    NaiveBayesParams p;
    const double n_all = n[0] + n[1];
    for (int c = 0; c < 2; ++c) {
        p.log_prior[c] = std::log(n[c] / n_all);
        p.log_prob[c].resize(v);
        p.log_absent[c].resize(v);
        p.log_absent_total[c] = 0.0;
        for (std::size_t f = 0; f < v; ++f) {
            const double q = (present[c][f] + alpha) / (n[c] + 2.0 * alpha);
            p.log_prob[c][f] = checked_log(q, "presence");
            p.log_absent[c][f] = checked_log(1.0 - q, "absence");
            p.log_absent_total[c] += p.log_absent[c][f];
        }
    }

    ClassifierModel m;
    m.kind = ModelKind::BernoulliNB;
    m.n_features = v;
    m.params = std::move(p);
    m.train_meta["alpha"] = std::to_string(alpha);
    return m;
}

} // namespace vngender
