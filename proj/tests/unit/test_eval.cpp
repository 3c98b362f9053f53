#include "fusebench/errors.hpp"
#include "fusebench/eval.hpp"
#include "fusebench/rng.hpp"

#include "../support/oracles.hpp"
#include "../support/test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace fusebench;
using namespace fusebench::test;

namespace {

PredictionRecord make_record(ActivityLabel truth, ActivityLabel predicted,
                             const std::string& id = "s") {
    PredictionRecord r;
    r.segment_id = id;
    r.truth = truth;
    r.predicted = {predicted};
    r.ablation_id = "t";
    return r;
}

PredictionRecord make_failure(ActivityLabel truth, const std::string& id = "s") {
    PredictionRecord r;
    r.segment_id = id;
    r.truth = truth;
    r.predicted = {ParseFailure{ParseFailureReason::no_label_match, "x"}};
    r.ablation_id = "t";
    return r;
}

} // namespace

TEST_SUITE("eval") {

TEST_CASE("confusion tallies labels and failures") {
    std::vector<PredictionRecord> records = {
        make_record(ActivityLabel::cooking, ActivityLabel::cooking, "a"),
        make_record(ActivityLabel::cooking, ActivityLabel::cooking, "b"),
        make_record(ActivityLabel::cooking, ActivityLabel::cooking, "c"),
    };
    ConfusionMatrix m = confusion(records);
    const auto cooking = static_cast<std::size_t>(ActivityLabel::cooking);
    CHECK(m.counts[cooking][cooking] == 3);
    CHECK(m.total() == 3);

    records.push_back(make_failure(ActivityLabel::eating, "d"));
    m = confusion(records);
    const auto eating = static_cast<std::size_t>(ActivityLabel::eating);
    CHECK(m.counts[eating][ConfusionMatrix::kFailureColumn] == 1);
    CHECK(m.total() == 4);

    CHECK_THROWS_AS(confusion({}), EmptyRecords);
}

TEST_CASE("row sums equal per-class supports on a balanced fixture") {
    std::mt19937_64 engine(19);
    const auto records = random_records(engine, 12, 120);
    const ConfusionMatrix m = confusion(records);
    CHECK(m.total() == 120);

    // Independent tally of supports straight off the records.
    for (ActivityLabel label : all_activities()) {
        std::int64_t support = 0;
        for (const auto& r : records) {
            if (r.truth == label) ++support;
        }
        CHECK(m.row_sum(static_cast<std::size_t>(label)) == support);
    }
}

TEST_CASE("precision 0.50 recall 0.40 gives the paper's 0.44 F1") {
    // 2 hits, 2 false positives (precision .5), 3 misses (recall .4).
    std::vector<PredictionRecord> records;
    records.push_back(make_record(ActivityLabel::vacuum_cleaning, ActivityLabel::vacuum_cleaning, "a"));
    records.push_back(make_record(ActivityLabel::vacuum_cleaning, ActivityLabel::vacuum_cleaning, "b"));
    records.push_back(make_record(ActivityLabel::vacuum_cleaning, ActivityLabel::cooking, "c"));
    records.push_back(make_record(ActivityLabel::vacuum_cleaning, ActivityLabel::cooking, "d"));
    records.push_back(make_record(ActivityLabel::vacuum_cleaning, ActivityLabel::cooking, "e"));
    records.push_back(make_record(ActivityLabel::eating, ActivityLabel::vacuum_cleaning, "f"));
    records.push_back(make_record(ActivityLabel::eating, ActivityLabel::vacuum_cleaning, "g"));

    const PointMetrics pm = point_metrics(confusion(records));
    const ClassMetrics& vc = pm.per_class.at(ActivityLabel::vacuum_cleaning);
    CHECK(vc.precision == doctest::Approx(0.50));
    CHECK(vc.recall == doctest::Approx(0.40));
    CHECK(vc.f1 == doctest::Approx(2.0 * 0.5 * 0.4 / 0.9));
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%.2f", vc.f1);
    CHECK(std::string(buf) == "0.44");
}

TEST_CASE("perfect diagonal scores 1.0 everywhere") {
    std::vector<PredictionRecord> records;
    for (ActivityLabel label : all_activities()) {
        records.push_back(make_record(label, label, std::string(canonical_string(label))));
    }
    const PointMetrics pm = point_metrics(confusion(records));
    CHECK(pm.accuracy == doctest::Approx(1.0));
    CHECK(pm.macro_f1 == doctest::Approx(1.0));
}

TEST_CASE("point metrics match the brute-force oracle on 200 random sets") {
    std::mt19937_64 engine(123);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n_classes = 3 + engine() % 10; // 3..12
        const std::size_t n = 1 + engine() % 500;
        const auto records = random_records(engine, n_classes, n);

        const PointMetrics pm = point_metrics(confusion(records));
        const OracleScores oracle = brute_force_scores(records);

        CHECK(pm.accuracy == doctest::Approx(static_cast<double>(oracle.accuracy)).epsilon(1e-12));
        CHECK(pm.macro_f1 == doctest::Approx(static_cast<double>(oracle.macro_f1)).epsilon(1e-12));
        for (ActivityLabel label : all_activities()) {
            const auto& got = pm.per_class.at(label);
            const auto& want = oracle.per_class.at(label);
            CHECK(got.precision ==
                  doctest::Approx(static_cast<double>(want.precision)).epsilon(1e-12));
            CHECK(got.recall == doctest::Approx(static_cast<double>(want.recall)).epsilon(1e-12));
            CHECK(got.f1 == doctest::Approx(static_cast<double>(want.f1)).epsilon(1e-12));
        }
    }
}

TEST_CASE("accuracy equals the mean correctness indicator") {
    std::mt19937_64 engine(77);
    for (int trial = 0; trial < 50; ++trial) {
        const auto records = random_records(engine, 12, 1 + engine() % 300);
        double mean = 0.0;
        for (const auto& r : records) {
            mean += (r.predicted.is_label() && r.predicted.label() == r.truth) ? 1.0 : 0.0;
        }
        mean /= static_cast<double>(records.size());
        CHECK(point_metrics(confusion(records)).accuracy == doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("permuting records leaves every point metric unchanged") {
    std::mt19937_64 engine(55);
    auto records = random_records(engine, 9, 200);
    const PointMetrics before = point_metrics(confusion(records));
    std::shuffle(records.begin(), records.end(), engine);
    const PointMetrics after = point_metrics(confusion(records));
    CHECK(before.accuracy == after.accuracy);
    CHECK(before.macro_f1 == after.macro_f1);
    for (ActivityLabel label : all_activities()) {
        CHECK(before.per_class.at(label).f1 == after.per_class.at(label).f1);
    }
}

TEST_CASE("F1 is zero exactly when the diagonal cell is zero") {
    std::mt19937_64 engine(99);
    for (int trial = 0; trial < 50; ++trial) {
        const auto records = random_records(engine, 6, 60);
        const ConfusionMatrix m = confusion(records);
        const PointMetrics pm = point_metrics(m);
        for (ActivityLabel label : all_activities()) {
            const auto c = static_cast<std::size_t>(label);
            const ClassMetrics& cm = pm.per_class.at(label);
            if (m.counts[c][c] == 0) {
                CHECK(cm.f1 == 0.0);
            } else {
                CHECK(cm.f1 > 0.0);
            }
            CHECK(cm.f1 >= 0.0);
            CHECK(cm.f1 <= 1.0);
        }
    }
}

TEST_CASE("failures never feed a precision denominator") {
    std::vector<PredictionRecord> records = {
        make_record(ActivityLabel::cooking, ActivityLabel::cooking, "a"),
        make_failure(ActivityLabel::cooking, "b"),
        make_failure(ActivityLabel::cooking, "c"),
    };
    const PointMetrics pm = point_metrics(confusion(records));
    CHECK(pm.per_class.at(ActivityLabel::cooking).precision == doctest::Approx(1.0));
    CHECK(pm.per_class.at(ActivityLabel::cooking).recall == doctest::Approx(1.0 / 3.0));
    CHECK(pm.accuracy == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("all-correct records bootstrap to a degenerate interval") {
    std::vector<PredictionRecord> records;
    for (int i = 0; i < 20; ++i) {
        records.push_back(
            make_record(ActivityLabel::cooking, ActivityLabel::cooking, std::to_string(i)));
    }
    const ConfidenceInterval ci = bootstrap_ci(records, Statistic::accuracy, 500, 42);
    CHECK(ci.lo == doctest::Approx(1.0));
    CHECK(ci.hi == doctest::Approx(1.0));
}

TEST_CASE("bootstrap matches the naive oracle on the frozen 20-record fixture") {
    std::mt19937_64 engine(2024);
    const auto records = random_records(engine, 12, 20);

    for (bool macro : {false, true}) {
        const Statistic stat = macro ? Statistic::macro_f1 : Statistic::accuracy;
        const ConfidenceInterval ci = bootstrap_ci(records, stat, 10000, 42, 0.05);
        const auto [lo, hi] = naive_bootstrap_ci(records, macro, 10000, 42, 0.05);
        CHECK(ci.lo == doctest::Approx(lo).epsilon(5e-4)); // agreement to 3 decimals
        CHECK(ci.hi == doctest::Approx(hi).epsilon(5e-4));
    }
}

TEST_CASE("bootstrap interval contains the point estimate") {
    std::mt19937_64 engine(31);
    for (int trial = 0; trial < 50; ++trial) {
        const auto records = random_records(engine, 12, 10 + engine() % 80);
        const double acc = point_metrics(confusion(records)).accuracy;
        const ConfidenceInterval ci =
            bootstrap_ci(records, Statistic::accuracy, 400, engine());
        CHECK(ci.lo <= acc + 1e-12);
        CHECK(ci.hi >= acc - 1e-12);
    }
}

TEST_CASE("widening alpha narrows the interval") {
    std::mt19937_64 engine(47);
    const auto records = random_records(engine, 12, 60);
    const ConfidenceInterval wide = bootstrap_ci(records, Statistic::accuracy, 2000, 9, 0.01);
    const ConfidenceInterval mid = bootstrap_ci(records, Statistic::accuracy, 2000, 9, 0.05);
    const ConfidenceInterval narrow = bootstrap_ci(records, Statistic::accuracy, 2000, 9, 0.20);
    CHECK(wide.lo <= mid.lo);
    CHECK(mid.lo <= narrow.lo);
    CHECK(narrow.hi <= mid.hi);
    CHECK(mid.hi <= wide.hi);
}

TEST_CASE("bootstrap is deterministic in the seed") {
    std::mt19937_64 engine(3);
    const auto records = random_records(engine, 8, 40);
    const ConfidenceInterval a = bootstrap_ci(records, Statistic::accuracy, 1000, 5);
    const ConfidenceInterval b = bootstrap_ci(records, Statistic::accuracy, 1000, 5);
    CHECK(a.lo == b.lo);
    CHECK(a.hi == b.hi);
}

TEST_CASE("too few replicates is an error") {
    std::mt19937_64 engine(3);
    const auto records = random_records(engine, 5, 10);
    CHECK_THROWS_AS(bootstrap_ci(records, Statistic::accuracy, 99, 1), TooFewReplicates);
    CHECK_THROWS_AS(bootstrap_ci({}, Statistic::accuracy, 1000, 1), EmptyRecords);
}

TEST_CASE("uniform predictions over balanced classes land near chance") {
    // 12,000 uniform draws; chance is 1/12.
    Rng rng(substream_seed(2026, 1));
    const auto acts = all_activities();
    std::vector<PredictionRecord> records;
    records.reserve(12000);
    for (std::size_t i = 0; i < 12000; ++i) {
        records.push_back(make_record(acts[i % acts.size()], acts[rng.next_index(acts.size())],
                                      std::to_string(i)));
    }
    const double acc = point_metrics(confusion(records)).accuracy;
    CHECK(std::abs(acc - 1.0 / 12.0) <= 0.015);
}

TEST_CASE("reports serialize losslessly") {
    std::mt19937_64 engine(12);
    const auto records = random_records(engine, 12, 60);
    const MetricsReport report = evaluate(records, BootstrapParams{500, 3, 0.05});
    const MetricsReport back = metrics_report_from_json(metrics_report_to_json(report));
    CHECK(back.accuracy == report.accuracy);
    CHECK(back.macro_f1 == report.macro_f1);
    CHECK(back.accuracy_ci.lo == report.accuracy_ci.lo);
    CHECK(back.macro_f1_ci.hi == report.macro_f1_ci.hi);
    CHECK(back.n == report.n);
    CHECK(back.per_class.size() == 12);
    CHECK(metrics_report_to_json(back) == metrics_report_to_json(report));
}

TEST_CASE("prediction records serialize losslessly") {
    PredictionRecord label = make_record(ActivityLabel::watching_tv, ActivityLabel::cooking, "x");
    PredictionRecord fail = make_failure(ActivityLabel::eating, "y");
    PredictionRecord open;
    open.segment_id = "z";
    open.truth = ActivityLabel::cooking;
    open.predicted = {OpenText{"Cooking in a food truck"}};
    open.ablation_id = "t";

    for (const auto& rec : {label, fail, open}) {
        const PredictionRecord back = prediction_record_from_json(prediction_record_to_json(rec));
        CHECK(prediction_record_to_json(back) == prediction_record_to_json(rec));
    }
}

} // TEST_SUITE
