#include "fusebench/eval.hpp"

#include "fusebench/errors.hpp"
#include "fusebench/rng.hpp"

#include <algorithm>
#include <cmath>

namespace fusebench {
namespace {

double statistic_of(const std::vector<PredictionRecord>& sample, Statistic statistic) {
    if (statistic == Statistic::accuracy) {
        std::int64_t correct = 0;
        for (const auto& r : sample) {
            if (r.predicted.is_label() && r.predicted.label() == r.truth) ++correct;
        }
        return static_cast<double>(correct) / static_cast<double>(sample.size());
    }
    return point_metrics(confusion(sample)).macro_f1;
}

} // namespace

std::int64_t ConfusionMatrix::total() const {
    std::int64_t sum = 0;
    for (const auto& row : counts) {
        for (auto v : row) sum += v;
    }
    return sum;
}

std::int64_t ConfusionMatrix::row_sum(std::size_t truth_row) const {
    std::int64_t sum = 0;
    for (auto v : counts[truth_row]) sum += v;
    return sum;
}

std::int64_t ConfusionMatrix::column_sum(std::size_t predicted_col) const {
    std::int64_t sum = 0;
    for (const auto& row : counts) sum += row[predicted_col];
    return sum;
}

ConfusionMatrix confusion(const std::vector<PredictionRecord>& records) {
    if (records.empty()) throw EmptyRecords("confusion over zero records");
    ConfusionMatrix m;
    for (const auto& r : records) {
        const auto row = static_cast<std::size_t>(r.truth);
        if (r.predicted.is_label()) {
            m.counts[row][static_cast<std::size_t>(r.predicted.label())] += 1;
        } else {
            m.counts[row][ConfusionMatrix::kFailureColumn] += 1;
        }
    }
    return m;
}

PointMetrics point_metrics(const ConfusionMatrix& m) {
    const std::int64_t total = m.total();
    if (total == 0) throw EmptyMatrix("metrics over an empty matrix");

    PointMetrics out;
    std::int64_t trace = 0;
    double f1_sum = 0.0;
    for (std::size_t c = 0; c < kActivityCount; ++c) {
        const std::int64_t diag = m.counts[c][c];
        trace += diag;
        const std::int64_t col = m.column_sum(c);
        const std::int64_t row = m.row_sum(c);
        ClassMetrics cm;
        cm.precision = col > 0 ? static_cast<double>(diag) / static_cast<double>(col) : 0.0;
        cm.recall = row > 0 ? static_cast<double>(diag) / static_cast<double>(row) : 0.0;
        cm.f1 = (cm.precision + cm.recall) > 0.0
                    ? 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall)
                    : 0.0;
        out.per_class[static_cast<ActivityLabel>(c)] = cm;
        f1_sum += cm.f1;
    }
    out.accuracy = static_cast<double>(trace) / static_cast<double>(total);
    out.macro_f1 = f1_sum / static_cast<double>(kActivityCount);
    return out;
}

ConfidenceInterval bootstrap_ci(const std::vector<PredictionRecord>& records,
                                Statistic statistic, std::size_t replicates, std::uint64_t seed,
                                double alpha) {
    if (records.empty()) throw EmptyRecords("bootstrap over zero records");
    if (replicates < 100) {
        throw TooFewReplicates(std::to_string(replicates) + " replicates, need >= 100");
    }

    const std::size_t n = records.size();
    std::vector<double> stats(replicates);
    std::vector<PredictionRecord> sample(n);
    for (std::size_t i = 0; i < replicates; ++i) {
        Rng rng(substream_seed(seed, i));
        for (std::size_t k = 0; k < n; ++k) sample[k] = records[rng.next_index(n)];
        stats[i] = statistic_of(sample, statistic);
    }
    std::sort(stats.begin(), stats.end());

    auto nearest_rank = [&](double q) {
        auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(replicates)));
        rank = std::clamp<std::size_t>(rank, 1, replicates);
        return stats[rank - 1];
    };
    return {nearest_rank(alpha / 2.0), nearest_rank(1.0 - alpha / 2.0)};
}

MetricsReport evaluate(const std::vector<PredictionRecord>& records,
                       const BootstrapParams& params) {
    MetricsReport report;
    const PointMetrics pm = point_metrics(confusion(records));
    report.accuracy = pm.accuracy;
    report.macro_f1 = pm.macro_f1;
    report.per_class = pm.per_class;
    report.n = records.size();
    report.bootstrap = params;
    report.accuracy_ci =
        bootstrap_ci(records, Statistic::accuracy, params.replicates, params.seed, params.alpha);
    report.macro_f1_ci =
        bootstrap_ci(records, Statistic::macro_f1, params.replicates, params.seed, params.alpha);
    return report;
}

nlohmann::json metrics_report_to_json(const MetricsReport& report) {
    nlohmann::json per_class = nlohmann::json::array();
    for (const auto& [label, cm] : report.per_class) {
        per_class.push_back({{"label", std::string(canonical_string(label))},
                             {"precision", cm.precision},
                             {"recall", cm.recall},
                             {"f1", cm.f1}});
    }
    return {{"accuracy", report.accuracy},
            {"accuracy_ci", {report.accuracy_ci.lo, report.accuracy_ci.hi}},
            {"macro_f1", report.macro_f1},
            {"macro_f1_ci", {report.macro_f1_ci.lo, report.macro_f1_ci.hi}},
            {"per_class", per_class},
            {"n", report.n},
            {"bootstrap",
             {{"replicates", report.bootstrap.replicates},
              {"seed", report.bootstrap.seed},
              {"alpha", report.bootstrap.alpha}}}};
}

MetricsReport metrics_report_from_json(const nlohmann::json& j) {
    MetricsReport report;
    report.accuracy = j.at("accuracy").get<double>();
    report.accuracy_ci = {j.at("accuracy_ci")[0].get<double>(),
                          j.at("accuracy_ci")[1].get<double>()};
    report.macro_f1 = j.at("macro_f1").get<double>();
    report.macro_f1_ci = {j.at("macro_f1_ci")[0].get<double>(),
                          j.at("macro_f1_ci")[1].get<double>()};
    for (const auto& row : j.at("per_class")) {
        auto label = parse_activity(row.at("label").get<std::string>());
        if (!label) throw UnknownActivity(row.at("label").get<std::string>());
        report.per_class[*label] = {row.at("precision").get<double>(),
                                    row.at("recall").get<double>(), row.at("f1").get<double>()};
    }
    report.n = j.at("n").get<std::size_t>();
    report.bootstrap.replicates = j.at("bootstrap").at("replicates").get<std::size_t>();
    report.bootstrap.seed = j.at("bootstrap").at("seed").get<std::uint64_t>();
    report.bootstrap.alpha = j.at("bootstrap").at("alpha").get<double>();
    return report;
}

nlohmann::json prediction_record_to_json(const PredictionRecord& rec) {
    nlohmann::json j;
    j["segment_id"] = rec.segment_id;
    j["truth"] = std::string(canonical_string(rec.truth));
    j["ablation_id"] = rec.ablation_id;
    if (rec.predicted.is_label()) {
        j["predicted"] = std::string(canonical_string(rec.predicted.label()));
    } else if (std::holds_alternative<OpenText>(rec.predicted.outcome)) {
        j["open_text"] = std::get<OpenText>(rec.predicted.outcome).text;
    } else {
        const auto& f = std::get<ParseFailure>(rec.predicted.outcome);
        j["parse_failure"] = std::string(parse_failure_string(f.reason));
        if (!f.detail.empty()) j["detail"] = f.detail;
    }
    return j;
}

PredictionRecord prediction_record_from_json(const nlohmann::json& j) {
    PredictionRecord rec;
    rec.segment_id = j.at("segment_id").get<std::string>();
    auto truth = parse_activity(j.at("truth").get<std::string>());
    if (!truth) throw UnknownActivity(j.at("truth").get<std::string>());
    rec.truth = *truth;
    rec.ablation_id = j.value("ablation_id", "");
    if (j.contains("predicted")) {
        auto label = parse_activity(j.at("predicted").get<std::string>());
        if (!label) throw UnknownActivity(j.at("predicted").get<std::string>());
        rec.predicted = {*label};
    } else if (j.contains("open_text")) {
        rec.predicted = {OpenText{j.at("open_text").get<std::string>()}};
    } else {
        ParseFailure f;
        const std::string reason = j.value("parse_failure", "no_label_match");
        if (reason == "mapper_unresolved") f.reason = ParseFailureReason::mapper_unresolved;
        else if (reason == "empty_response") f.reason = ParseFailureReason::empty_response;
        else if (reason == "transport") f.reason = ParseFailureReason::transport;
        f.detail = j.value("detail", "");
        rec.predicted = {f};
    }
    return rec;
}

} // namespace fusebench
