#include "vngender/classical.hpp"

#include "vngender/error.hpp"
#include "vngender/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vngender {

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void require_both_labels(const LabeledMatrix& data, const char* model) {
    bool has[2] = {false, false};
    for (int y : data.labels) has[y] = true;
    if (!has[0] || !has[1]) {
        throw DataError("single_class", std::string(model) + " needs both labels in the training data");
    }
}

} // namespace

LogisticObjective logistic_objective(const LabeledMatrix& data, std::span<const double> w, double b,
                                     double l2) {
    LogisticObjective out;
    out.grad_w.assign(w.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double z = dot(data.rows[i], w) + b;
        const int y = data.labels[i];
        out.loss += y == 1 ? softplus(-z) : softplus(z);
        const double r = (sigmoid(z) - y) * inv_n;
        for (const auto& e : data.rows[i].entries) out.grad_w[e.index] += r * e.weight;
        out.grad_b += r;
    }
    out.loss *= inv_n;
    double sq = 0.0;
    for (std::size_t f = 0; f < w.size(); ++f) {
        sq += w[f] * w[f];
        out.grad_w[f] += l2 * w[f];
    }
    out.loss += 0.5 * l2 * sq;
    return out;
}

ClassifierModel fit_logistic_regression(const LabeledMatrix& data, const LogisticConfig& cfg) {
    data.validate();
    if (cfg.max_iter < 1) throw ConfigError("max_iter must be at least 1");
    if (!(cfg.l2 >= 0.0)) throw ConfigError("l2 must be >= 0");
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");

    LinearParams p;
    p.weights.assign(data.n_features, 0.0);
    for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
        LogisticObjective obj = logistic_objective(data, p.weights, p.bias, cfg.l2);
        if (!std::isfinite(obj.loss)) {
            throw DivergenceError("logistic regression loss became non-finite at iteration " +
                                  std::to_string(it) + " (step size too large?)");
        }
        p.objective_trace.push_back(obj.loss);
        double gmax = std::abs(obj.grad_b);
        for (double g : obj.grad_w) gmax = std::max(gmax, std::abs(g));
        p.iterations = it;
        if (gmax < cfg.tol) {
            p.converged = true;
            break;
        }
        for (std::size_t f = 0; f < p.weights.size(); ++f) p.weights[f] -= cfg.learning_rate * obj.grad_w[f];
        p.bias -= cfg.learning_rate * obj.grad_b;
    }

    ClassifierModel m;
    m.kind = ModelKind::LogisticRegression;
    m.n_features = data.n_features;
    m.train_meta["l2"] = std::to_string(cfg.l2);
    m.train_meta["learning_rate"] = std::to_string(cfg.learning_rate);
    m.train_meta["max_iter"] = std::to_string(cfg.max_iter);
    m.train_meta["tol"] = std::to_string(cfg.tol);
    m.train_meta["converged"] = p.converged ? "true" : "false";
    m.train_meta["iterations"] = std::to_string(p.iterations);
    m.params = std::move(p);
    return m;
}

double svm_objective(const LabeledMatrix& data, std::span<const double> w, double b, double c) {
    double hinge = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double y = data.labels[i] == 1 ? 1.0 : -1.0;
        hinge += std::max(0.0, 1.0 - y * (dot(data.rows[i], w) + b));
    }
    double sq = 0.0;
    for (double x : w) sq += x * x;
    return 0.5 * sq + c * hinge;
}

ClassifierModel fit_linear_svm(const LabeledMatrix& data, const SvmConfig& cfg) {
    data.validate();
    if (cfg.epochs < 1) throw ConfigError("epochs must be at least 1");
    if (!(cfg.c >= 0.0)) throw ConfigError("c must be >= 0");
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
    require_both_labels(data, "linear SVM");

    const std::size_t n = data.size();
    const double n_d = static_cast<double>(n);

    // w = scale * v, so the shrink step of the regularizer is O(1).
    std::vector<double> v(data.n_features, 0.0);
    double scale = 1.0;
    double bias = 0.0;
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    Rng rng(derive_seed(cfg.seed, 0x5F3));

    LinearParams p;
    std::size_t t = 0;
    auto materialize = [&] {
        std::vector<double> w(v.size());
        for (std::size_t f = 0; f < v.size(); ++f) w[f] = scale * v[f];
        return w;
    };

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(std::span<std::uint32_t>(order));
        for (std::uint32_t i : order) {
            ++t;
            const double eta = cfg.learning_rate / static_cast<double>(t);
            const auto& x = data.rows[i];
            const double y = data.labels[i] == 1 ? 1.0 : -1.0;
            const double margin = y * (scale * dot(x, v) + bias);

            // One-sample unbiased subgradient of the primal: w - c·n·y·x on a
            // margin violation, w otherwise.
            const double shrink = 1.0 - eta;
            if (shrink == 0.0) {
                std::fill(v.begin(), v.end(), 0.0);
                scale = 1.0;
            } else {
                scale *= shrink;
            }
            if (margin < 1.0 && cfg.c > 0.0) {
                const double step = eta * cfg.c * n_d * y;
                for (const auto& e : x.entries) v[e.index] += step * e.weight / scale;
                bias += step;
            }
            if (std::abs(scale) < 1e-9) {
                for (double& vf : v) vf *= scale;
                scale = 1.0;
            }
        }
        std::vector<double> w = materialize();
        const double obj = svm_objective(data, w, bias, cfg.c);
        if (!std::isfinite(obj) || !std::isfinite(bias)) {
            throw DivergenceError("linear SVM weights became non-finite in epoch " + std::to_string(epoch));
        }
        p.objective_trace.push_back(obj);
    }

    p.weights = materialize();
    p.bias = bias;
    p.iterations = t;
    p.converged = true;

    ClassifierModel m;
    m.kind = ModelKind::LinearSvm;
    m.n_features = data.n_features;
    m.train_meta["c"] = std::to_string(cfg.c);
    m.train_meta["learning_rate"] = std::to_string(cfg.learning_rate);
    m.train_meta["epochs"] = std::to_string(cfg.epochs);
    m.train_meta["seed"] = std::to_string(cfg.seed);
    m.params = std::move(p);
    return m;
}

} // namespace vngender
