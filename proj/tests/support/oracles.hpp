#pragma once

// Independent reference computations used by the unit and acceptance
// tests. Nothing here calls into the library's math: products instead of
// log sums, full enumeration instead of bucket scans, scalar loops instead
// of Eigen.

#include "vngender/classical.hpp"
#include "vngender/eval.hpp"
#include "vngender/lstm.hpp"
#include "vngender/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <vector>

namespace oracle {

using Dense = std::vector<std::vector<int>>;

inline vngender::SparseVector to_sparse(const std::vector<int>& row) {
    vngender::SparseVector v;
    for (std::size_t f = 0; f < row.size(); ++f) {
        if (row[f] != 0) v.entries.push_back({static_cast<std::uint32_t>(f), static_cast<double>(row[f])});
    }
    return v;
}

inline vngender::LabeledMatrix to_matrix(const Dense& x, const std::vector<int>& y, std::size_t n_features) {
    vngender::LabeledMatrix m;
    m.n_features = n_features;
    m.labels = y;
    for (const auto& row : x) m.rows.push_back(to_sparse(row));
    return m;
}

// ---- naive Bayes: multiply smoothed relative frequencies directly ----

inline double multinomial_nb_posterior(const Dense& x, const std::vector<int>& y, double alpha,
                                       const std::vector<int>& doc) {
    const std::size_t v = doc.size();
    long double joint[2];
    for (int c = 0; c < 2; ++c) {
        long double n_c = 0, total = 0;
        std::vector<long double> count(v, 0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (y[i] != c) continue;
            n_c += 1;
            for (std::size_t f = 0; f < v; ++f) {
                count[f] += x[i][f];
                total += x[i][f];
            }
        }
        long double p = n_c / static_cast<long double>(x.size());
        for (std::size_t f = 0; f < v; ++f) {
            const long double theta = (count[f] + alpha) / (total + alpha * static_cast<long double>(v));
            for (int k = 0; k < doc[f]; ++k) p *= theta;
        }
        joint[c] = p;
    }
    return static_cast<double>(joint[1] / (joint[0] + joint[1]));
}

inline double bernoulli_nb_posterior(const Dense& x, const std::vector<int>& y, double alpha,
                                     const std::vector<int>& doc) {
    const std::size_t v = doc.size();
    long double joint[2];
    for (int c = 0; c < 2; ++c) {
        long double n_c = 0;
        std::vector<long double> present(v, 0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (y[i] != c) continue;
            n_c += 1;
            for (std::size_t f = 0; f < v; ++f) present[f] += x[i][f] > 0 ? 1 : 0;
        }
        long double p = n_c / static_cast<long double>(x.size());
        for (std::size_t f = 0; f < v; ++f) {
            const long double q = (present[f] + alpha) / (n_c + 2 * alpha);
            p *= doc[f] > 0 ? q : 1 - q;
        }
        joint[c] = p;
    }
    return static_cast<double>(joint[1] / (joint[0] + joint[1]));
}

// ---- Gini split: enumerate every (feature, midpoint) pair ----

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double weighted_gini = 0.0;
};

inline double gini(double n0, double n1) {
    const double n = n0 + n1;
    if (n == 0) return 0.0;
    return 1.0 - (n0 / n) * (n0 / n) - (n1 / n) * (n1 / n);
}

inline Split exhaustive_split(const Dense& x, const std::vector<int>& y, std::size_t n_features,
                              std::size_t min_leaf = 1) {
    Split best;
    double best_score = std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(x.size());
    for (std::size_t f = 0; f < n_features; ++f) {
        std::set<int> values;
        for (const auto& row : x) values.insert(row[f]);
        std::vector<int> sorted(values.begin(), values.end());
        for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
            const double t = (sorted[k] + sorted[k + 1]) / 2.0;
            double l[2] = {0, 0}, r[2] = {0, 0};
            for (std::size_t i = 0; i < x.size(); ++i) (x[i][f] >= t ? r : l)[y[i]] += 1;
            const double nl = l[0] + l[1], nr = r[0] + r[1];
            if (nl < static_cast<double>(min_leaf) || nr < static_cast<double>(min_leaf)) continue;
            const double score = nl / n * gini(l[0], l[1]) + nr / n * gini(r[0], r[1]);
            // strictly better by more than rounding noise; otherwise the
            // earlier (lower feature, lower threshold) candidate stays
            if (score < best_score - 1e-12) {
                best_score = score;
                best = {static_cast<int>(f), t, score};
            }
        }
    }
    return best;
}

// ---- metrics straight from the textbook formulas ----

struct Prf {
    double p, r, f;
};

inline Prf prf(double tp, double fp, double fn) {
    const double p = tp + fp == 0 ? 0.0 : tp / (tp + fp);
    const double r = tp + fn == 0 ? 0.0 : tp / (tp + fn);
    const double f = p + r == 0 ? 0.0 : 2 * p * r / (p + r);
    return {p, r, f};
}

// ---- split arithmetic with integers only ----

inline std::array<std::size_t, 3> split_sizes(std::size_t n) {
    const std::size_t a = n * 7 / 10;
    const std::size_t b = n * 8 / 10;
    return {a, b - a, n - b};
}

// ---- LSTM recurrence, one scalar at a time ----

inline double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double lstm_scalar_forward(const std::vector<std::vector<double>>& xs, const vngender::LstmParams& p) {
    const std::size_t h_dim = p.hidden();
    const std::size_t x_dim = p.input_dim();
    std::vector<double> h(h_dim, 0.0), c(h_dim, 0.0);
    for (const auto& x : xs) {
        std::vector<double> pre[4];
        for (int g = 0; g < 4; ++g) {
            pre[g].assign(h_dim, 0.0);
            for (std::size_t r = 0; r < h_dim; ++r) {
                double s = p.b[g](r);
                for (std::size_t k = 0; k < x_dim; ++k) s += p.W[g](r, k) * x[k];
                for (std::size_t k = 0; k < h_dim; ++k) s += p.U[g](r, k) * h[k];
                pre[g][r] = s;
            }
        }
        for (std::size_t r = 0; r < h_dim; ++r) {
            const double i = sig(pre[0][r]);
            const double f = sig(pre[1][r]);
            const double o = sig(pre[2][r]);
            const double g = std::tanh(pre[3][r]);
            c[r] = f * c[r] + i * g;
        }
        for (std::size_t r = 0; r < h_dim; ++r) {
            const double o = sig(pre[2][r]);
            h[r] = o * std::tanh(c[r]);
        }
    }
    double z = p.c;
    for (std::size_t r = 0; r < h_dim; ++r) z += p.v(r) * h[r];
    return sig(z);
}

// ---- finite differences ----

/// |a - n| / max(|a|, |n|); pairs where both sides are below `floor` are
/// compared absolutely against the floor instead, since their ratio is noise.
inline double relative_error(double analytic, double numeric, double floor = 1e-10) {
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    if (scale < floor) return std::abs(analytic - numeric) / floor;
    return std::abs(analytic - numeric) / scale;
}

// ---- random instances ----

struct Instance {
    Dense x;
    std::vector<int> y;
    std::size_t n_features = 0;
};

/// Random count matrix with both labels present.
inline Instance random_instance(vngender::Rng& rng, std::size_t max_rows, std::size_t max_features,
                                int max_count = 3, std::size_t min_rows = 2) {
    Instance in;
    const std::size_t rows = min_rows + rng.index(max_rows - min_rows + 1);
    in.n_features = 1 + rng.index(max_features);
    in.x.assign(rows, std::vector<int>(in.n_features, 0));
    for (auto& row : in.x) {
        for (auto& v : row) v = static_cast<int>(rng.index(static_cast<std::uint64_t>(max_count) + 1));
    }
    in.y.resize(rows);
    for (auto& l : in.y) l = static_cast<int>(rng.index(2));
    in.y[0] = 0;
    in.y[1] = 1;
    return in;
}

} // namespace oracle
