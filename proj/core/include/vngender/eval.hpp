#pragma once

#include "vngender/data_io.hpp"
#include "vngender/names.hpp"
#include "vngender/pipeline.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace vngender {

struct SplitSpec {
    double train_frac = 0.7;
    double dev_frac = 0.1;
    double test_frac = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
};

struct DatasetSplit {
    Dataset train;
    Dataset dev;
    Dataset test;
};

/// Per label: seeded shuffle, contiguous cut at floor(n·train) and
/// floor(n·(train+dev)); the pieces are merged across labels and each
/// subset reshuffled.
DatasetSplit stratified_split(const Dataset& d, const SplitSpec& spec);

/// Sizes the per-label cuts produce for n records: {train, dev, test}.
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitSpec& spec);

/// Label 1 (male) is the positive class.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct MacroMetrics {
    ClassMetrics male;   ///< label 1 as positive
    ClassMetrics female; ///< label 0 as positive
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
};

/// 0/0 ratios count as 0. Throws DataError on an empty matrix.
MacroMetrics macro_metrics(const ConfusionMatrix& cm);

/// Macro F1 of always predicting the majority label of `labels`.
double majority_baseline_macro_f1(std::span<const int> labels);

struct Misclassified {
    std::string text; ///< selected components, space-joined
    int truth = 0;
    int predicted = 0;
};

struct ExperimentResult {
    MacroMetrics metrics;
    ConfusionMatrix confusion;
    std::vector<Misclassified> errors;
    std::size_t skipped_train = 0;
    std::size_t skipped_test = 0;
    std::size_t evaluated = 0;
    double majority_baseline = 0.0;
};

/// Scores a trained pipeline on every record of `d` whose selected
/// components are non-empty.
ExperimentResult evaluate_pipeline(const TrainedPipeline& model, const Dataset& d);

/// split → select → fit on train → score on test. The dev subset is not used.
ExperimentResult run_experiment(const Dataset& d, ComponentMask mask, const ExperimentArm& arm,
                                const SplitSpec& spec);
/// Same, on an existing split. The model seed is derived from the arm seed
/// and the mask so every (mask, arm) cell is independent.
ExperimentResult run_experiment_on_split(const DatasetSplit& split, ComponentMask mask, const ExperimentArm& arm);

struct AblationReport {
    std::vector<ComponentMask> masks;
    std::vector<std::string> arms;
    /// cells[mask][arm]
    std::vector<std::vector<ExperimentResult>> cells;
    /// Train + test records skipped per mask (empty selection).
    std::vector<std::size_t> skipped_records;
    std::uint64_t seed = 0;
};

/// Every one of the seven masks against every arm, on one shared split.
/// `threads` = 0 uses the hardware concurrency; the report does not depend
/// on it.
AblationReport run_ablation(const Dataset& d, std::span<const ExperimentArm> arms, const SplitSpec& spec,
                            std::size_t threads = 0, std::span<const ComponentMask> masks = {});

void write_metrics_tsv(const std::string& title, const ExperimentResult& r, std::ostream& out);
void write_ablation_tsv(const AblationReport& report, std::ostream& out);
void write_misclassified_tsv(const ExperimentResult& r, std::ostream& out, std::size_t limit = 0);

/// Structured report (JSON text) used by the CLI's --report option.
std::string experiment_to_json(const std::string& title, const ExperimentResult& r);
std::string ablation_to_json(const AblationReport& report);

} // namespace vngender
