#include "vngender/eval.hpp"

#include "vngender/error.hpp"
#include "vngender/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <thread>

namespace vngender {

void SplitSpec::validate() const {
    if (!(train_frac > 0.0 && dev_frac > 0.0 && test_frac > 0.0)) {
        throw ConfigError("split fractions must all be positive");
    }
    if (std::abs(train_frac + dev_frac + test_frac - 1.0) > 1e-12) {
        throw ConfigError("split fractions must sum to 1");
    }
}

namespace {

// floor() that forgives the representation error of products such as
// 100 * 0.7 or 10 * (0.7 + 0.1).
std::size_t floor_count(double x) {
    return static_cast<std::size_t>(std::floor(x + 1e-9 * std::max(1.0, std::abs(x))));
}

} // namespace

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitSpec& spec) {
    const double nd = static_cast<double>(n);
    const std::size_t a = std::min(n, floor_count(nd * spec.train_frac));
    const std::size_t b = std::clamp(floor_count(nd * (spec.train_frac + spec.dev_frac)), a, n);
    return {a, b - a, n - b};
}

DatasetSplit stratified_split(const Dataset& d, const SplitSpec& spec) {
    spec.validate();
    std::array<std::vector<std::uint32_t>, 2> by_label;
    for (std::size_t i = 0; i < d.size(); ++i) {
        by_label[d.records[i].gender == 1 ? 1 : 0].push_back(static_cast<std::uint32_t>(i));
    }
    for (int label = 0; label < 2; ++label) {
        if (by_label[label].size() < 3) {
            throw DataError("label_too_small", std::string("label ") + std::to_string(label) + " (" +
                                                   gender_name(label) + ") has " +
                                                   std::to_string(by_label[label].size()) +
                                                   " records; at least 3 are needed to fill train, dev and test");
        }
    }

    std::array<std::vector<std::uint32_t>, 3> parts;
    for (int label = 1; label >= 0; --label) {
        auto& idx = by_label[label];
        Rng rng(derive_seed(spec.seed, 100 + static_cast<std::uint64_t>(label)));
        rng.shuffle(std::span<std::uint32_t>(idx));
        const auto sizes = split_sizes(idx.size(), spec);
        auto it = idx.begin();
        for (int k = 0; k < 3; ++k) {
            parts[k].insert(parts[k].end(), it, it + static_cast<std::ptrdiff_t>(sizes[k]));
            it += static_cast<std::ptrdiff_t>(sizes[k]);
        }
    }

    DatasetSplit out;
    std::array<Dataset*, 3> targets{&out.train, &out.dev, &out.test};
    const char* names[3] = {"train", "dev", "test"};
    for (int k = 0; k < 3; ++k) {
        Rng rng(derive_seed(spec.seed, 200 + static_cast<std::uint64_t>(k)));
        rng.shuffle(std::span<std::uint32_t>(parts[k]));
        targets[k]->source_tag = d.source_tag + ":" + names[k];
        targets[k]->records.reserve(parts[k].size());
        for (auto i : parts[k]) targets[k]->records.push_back(d.records[i]);
    }
    return out;
}

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw DataError("length_mismatch", "truth has " + std::to_string(y_true.size()) + " labels, predictions " +
                                               std::to_string(y_pred.size()));
    }
    if (y_true.empty()) throw DataError("empty_evaluation", "nothing to evaluate");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const bool t = y_true[i] == 1;
        const bool p = y_pred[i] == 1;
        if (t && p) ++cm.tp;
        else if (!t && p) ++cm.fp;
        else if (!t && !p) ++cm.tn;
        else ++cm.fn;
    }
    return cm;
}

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

ClassMetrics class_metrics(std::size_t tp, std::size_t fp, std::size_t fn) {
    ClassMetrics m;
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

} // namespace

MacroMetrics macro_metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw DataError("empty_evaluation", "confusion matrix is empty");
    MacroMetrics m;
    m.male = class_metrics(cm.tp, cm.fp, cm.fn);
    m.female = class_metrics(cm.tn, cm.fn, cm.fp);
    m.macro_precision = (m.male.precision + m.female.precision) / 2.0;
    m.macro_recall = (m.male.recall + m.female.recall) / 2.0;
    m.macro_f1 = (m.male.f1 + m.female.f1) / 2.0;
    return m;
}

double majority_baseline_macro_f1(std::span<const int> labels) {
    if (labels.empty()) throw DataError("empty_evaluation", "nothing to evaluate");
    std::size_t male = 0;
    for (int y : labels) male += y == 1;
    const int majority = 2 * male >= labels.size() ? 1 : 0;
    std::vector<int> pred(labels.size(), majority);
    return macro_metrics(confusion(labels, pred)).macro_f1;
}

ExperimentResult evaluate_pipeline(const TrainedPipeline& model, const Dataset& d) {
    ExperimentResult r;
    r.skipped_train = model.skipped_training_records;
    std::vector<int> truth, pred;
    truth.reserve(d.size());
    pred.reserve(d.size());
    for (const auto& rec : d.records) {
        auto sel = select_name(rec.full_name, model.mask);
        if (!sel || sel->tokens.empty()) {
            ++r.skipped_test;
            continue;
        }
        const Prediction p = model.predict_tokens(sel->tokens);
        truth.push_back(rec.gender);
        pred.push_back(p.label);
        if (p.label != rec.gender) {
            std::string text;
            for (const auto& t : sel->tokens) {
                if (!text.empty()) text += ' ';
                text += t;
            }
            r.errors.push_back({std::move(text), rec.gender, p.label});
        }
    }
    if (truth.empty()) {
        throw DataError("empty_evaluation", "no evaluation record has the components selected by mask '" +
                                                model.mask.name() + "'");
    }
    r.evaluated = truth.size();
    r.confusion = confusion(truth, pred);
    r.metrics = macro_metrics(r.confusion);
    r.majority_baseline = majority_baseline_macro_f1(truth);
    return r;
}

ExperimentResult run_experiment_on_split(const DatasetSplit& split, ComponentMask mask, const ExperimentArm& arm) {
    ExperimentArm cell = arm;
    cell.model.seed = derive_seed(arm.model.seed, mask.bits());
    TrainedPipeline model = train_pipeline(split.train, mask, cell);
    return evaluate_pipeline(model, split.test);
}

ExperimentResult run_experiment(const Dataset& d, ComponentMask mask, const ExperimentArm& arm,
                                const SplitSpec& spec) {
    return run_experiment_on_split(stratified_split(d, spec), mask, arm);
}

AblationReport run_ablation(const Dataset& d, std::span<const ExperimentArm> arms, const SplitSpec& spec,
                            std::size_t threads, std::span<const ComponentMask> masks) {
    if (arms.empty()) throw ConfigError("ablation needs at least one model");
    AblationReport report;
    report.seed = spec.seed;
    if (masks.empty()) {
        auto all = ComponentMask::all();
        report.masks.assign(all.begin(), all.end());
    } else {
        report.masks.assign(masks.begin(), masks.end());
    }
    for (const auto& a : arms) report.arms.push_back(a.name());

    const DatasetSplit split = stratified_split(d, spec);
    const std::size_t n_cells = report.masks.size() * arms.size();
    report.cells.assign(report.masks.size(), std::vector<ExperimentResult>(arms.size()));
    std::vector<std::exception_ptr> failures(n_cells);

    auto run_cell = [&](std::size_t cell) {
        const std::size_t mi = cell / arms.size();
        const std::size_t ai = cell % arms.size();
        try {
            report.cells[mi][ai] = run_experiment_on_split(split, report.masks[mi], arms[ai]);
        } catch (...) {
            failures[cell] = std::current_exception();
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n_cells);
    if (threads <= 1) {
        for (std::size_t c = 0; c < n_cells; ++c) run_cell(c);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t c = w; c < n_cells; c += threads) run_cell(c);
            });
        }
    }
    for (auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }

    for (const auto& row : report.cells) {
        report.skipped_records.push_back(row.front().skipped_train + row.front().skipped_test);
    }
    return report;
}

namespace {

std::string pct(double x) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << 100.0 * x;
    return s.str();
}

nlohmann::json metrics_json(const ExperimentResult& r) {
    auto cls = [](const ClassMetrics& m) {
        return nlohmann::json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
    };
    return {
        {"macro_precision", r.metrics.macro_precision},
        {"macro_recall", r.metrics.macro_recall},
        {"macro_f1", r.metrics.macro_f1},
        {"male", cls(r.metrics.male)},
        {"female", cls(r.metrics.female)},
        {"confusion", {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}}},
        {"evaluated", r.evaluated},
        {"skipped_train", r.skipped_train},
        {"skipped_test", r.skipped_test},
        {"majority_baseline_macro_f1", r.majority_baseline},
        {"misclassified", r.errors.size()},
    };
}

} // namespace

void write_metrics_tsv(const std::string& title, const ExperimentResult& r, std::ostream& out) {
    out << "model\tclass\tprecision\trecall\tf1\n";
    out << title << "\tmale\t" << pct(r.metrics.male.precision) << '\t' << pct(r.metrics.male.recall) << '\t'
        << pct(r.metrics.male.f1) << '\n';
    out << title << "\tfemale\t" << pct(r.metrics.female.precision) << '\t' << pct(r.metrics.female.recall) << '\t'
        << pct(r.metrics.female.f1) << '\n';
    out << title << "\tmacro\t" << pct(r.metrics.macro_precision) << '\t' << pct(r.metrics.macro_recall) << '\t'
        << pct(r.metrics.macro_f1) << '\n';
    out << "\nconfusion\ttp\tfp\ttn\tfn\n";
    out << title << '\t' << r.confusion.tp << '\t' << r.confusion.fp << '\t' << r.confusion.tn << '\t'
        << r.confusion.fn << '\n';
    out << "\nevaluated\t" << r.evaluated << "\nskipped_test\t" << r.skipped_test << "\nskipped_train\t"
        << r.skipped_train << '\n';
}

void write_ablation_tsv(const AblationReport& report, std::ostream& out) {
    out << "components";
    for (const auto& a : report.arms) out << '\t' << a << ":male\t" << a << ":female\t" << a << ":macro";
    out << "\tskipped\n";
    for (std::size_t mi = 0; mi < report.masks.size(); ++mi) {
        out << report.masks[mi].label();
        for (const auto& cell : report.cells[mi]) {
            out << '\t' << pct(cell.metrics.male.f1) << '\t' << pct(cell.metrics.female.f1) << '\t'
                << pct(cell.metrics.macro_f1);
        }
        out << '\t' << report.skipped_records[mi] << '\n';
    }
}

void write_misclassified_tsv(const ExperimentResult& r, std::ostream& out, std::size_t limit) {
    out << "components\ttrue\tpredicted\n";
    std::size_t n = 0;
    for (const auto& e : r.errors) {
        if (limit && n++ >= limit) break;
        out << e.text << '\t' << e.truth << '\t' << e.predicted << '\n';
    }
}

std::string experiment_to_json(const std::string& title, const ExperimentResult& r) {
    nlohmann::json j{{"kind", "evaluation"}, {"model", title}, {"metrics", metrics_json(r)}};
    return j.dump(2);
}

std::string ablation_to_json(const AblationReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t mi = 0; mi < report.masks.size(); ++mi) {
        nlohmann::json cells = nlohmann::json::object();
        for (std::size_t ai = 0; ai < report.arms.size(); ++ai) {
            cells[report.arms[ai]] = metrics_json(report.cells[mi][ai]);
        }
        rows.push_back({{"mask", report.masks[mi].name()},
                        {"label", report.masks[mi].label()},
                        {"skipped_records", report.skipped_records[mi]},
                        {"models", std::move(cells)}});
    }
    nlohmann::json j{{"kind", "ablation"}, {"seed", report.seed}, {"models", report.arms}, {"rows", std::move(rows)}};
    return j.dump(2);
}

} // namespace vngender
