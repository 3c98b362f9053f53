#pragma once

#include "fusebench/parse.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace fusebench {

struct PredictionRecord {
    std::string segment_id;
    ActivityLabel truth = ActivityLabel::vacuum_cleaning;
    ParsedPrediction predicted;
    std::string ablation_id;
};

// 12x13 count grid: rows are truth in dataset order, the 13th column pools
// parse failures. The failure column never feeds a precision denominator.
struct ConfusionMatrix {
    static constexpr std::size_t kFailureColumn = kActivityCount;
    std::array<std::array<std::int64_t, kActivityCount + 1>, kActivityCount> counts{};

    std::int64_t total() const;
    std::int64_t row_sum(std::size_t truth_row) const;
    std::int64_t column_sum(std::size_t predicted_col) const;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct PointMetrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::map<ActivityLabel, ClassMetrics> per_class;
};

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 0.0;
};

struct BootstrapParams {
    std::size_t replicates = 10000;
    std::uint64_t seed = 0;
    double alpha = 0.05;
};

struct MetricsReport {
    double accuracy = 0.0;
    ConfidenceInterval accuracy_ci;
    double macro_f1 = 0.0;
    ConfidenceInterval macro_f1_ci;
    std::map<ActivityLabel, ClassMetrics> per_class;
    std::size_t n = 0;
    BootstrapParams bootstrap;
};

// Tallies the records. Throws EmptyRecords.
ConfusionMatrix confusion(const std::vector<PredictionRecord>& records);

// accuracy = trace/total; per class, P = diag/colsum and R = diag/rowsum
// (0 on an empty denominator), F1 = 2PR/(P+R); macro-F1 is the unweighted
// mean over all 12 classes. Throws EmptyMatrix.
PointMetrics point_metrics(const ConfusionMatrix& m);

enum class Statistic { accuracy, macro_f1 };

// Percentile bootstrap: resamples n-out-of-n with replacement B times and
// takes the nearest-rank (alpha/2, 1-alpha/2) quantiles of the replicate
// statistics. Deterministic given the seed: replicate i draws its indices
// from mt19937_64(substream_seed(seed, i)) via engine() % n.
// Throws EmptyRecords, TooFewReplicates (B < 100).
ConfidenceInterval bootstrap_ci(const std::vector<PredictionRecord>& records,
                                Statistic statistic, std::size_t replicates, std::uint64_t seed,
                                double alpha = 0.05);

// Point metrics plus bootstrap intervals for accuracy and macro-F1.
MetricsReport evaluate(const std::vector<PredictionRecord>& records,
                       const BootstrapParams& params);

nlohmann::json metrics_report_to_json(const MetricsReport& report);
MetricsReport metrics_report_from_json(const nlohmann::json& j);

nlohmann::json prediction_record_to_json(const PredictionRecord& rec);
PredictionRecord prediction_record_from_json(const nlohmann::json& j);

} // namespace fusebench
