#include "fusebench/emulator.hpp"
#include "fusebench/errors.hpp"
#include "fusebench/jsonl.hpp"
#include "fusebench/parse.hpp"
#include "fusebench/runner.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

using namespace fusebench;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

#ifndef FUSEBENCH_DEFAULT_ASSET_DIR
#define FUSEBENCH_DEFAULT_ASSET_DIR "assets"
#endif

std::filesystem::path default_assets() {
    if (const char* env = std::getenv("FUSEBENCH_ASSETS")) return env;
    return FUSEBENCH_DEFAULT_ASSET_DIR;
}

void emit(bool jsonl, const json& machine, const std::string& human) {
    if (jsonl) {
        std::cout << machine.dump() << '\n';
    } else {
        std::cout << human << '\n';
    }
}

struct ValidateArgs {
    std::string manifest;
    std::string observations;
    bool jsonl = false;
};

int cmd_validate(const ValidateArgs& args) {
    const Manifest manifest = load_manifest(args.manifest);
    PlanMap plans;
    for (const auto& rec : manifest.records) {
        plans[rec.segment_id] = plan_windows(rec.duration_s);
    }

    if (args.observations.empty()) {
        emit(args.jsonl, {{"status", "ok"}, {"segments", manifest.records.size()}},
             "OK: " + std::to_string(manifest.records.size()) + " segments");
        return kExitOk;
    }

    const ObservationMap obs = load_observations(args.observations, manifest, plans);
    std::set<std::size_t> counts;
    for (const auto& [id, seg] : obs) counts.insert(seg.bundles.size());
    std::string timesteps = counts.size() == 1 ? std::to_string(*counts.begin()) : "varying";
    emit(args.jsonl,
         {{"status", "ok"},
          {"segments", manifest.records.size()},
          {"timesteps", timesteps}},
         "OK: " + std::to_string(manifest.records.size()) + " segments, " + timesteps +
             " timesteps each");
    return kExitOk;
}

struct PromptArgs {
    std::string manifest;
    std::string observations;
    std::string segment;
    std::string mode = "closed";
    std::string shots = "one";
    std::string mask = "clix";
    std::string assets;
    bool jsonl = false;
};

int cmd_prompt(const PromptArgs& args) {
    const Manifest manifest = load_manifest(args.manifest);
    if (manifest.find(args.segment) == nullptr) throw UnknownSegment(args.segment);
    PlanMap plans;
    for (const auto& rec : manifest.records) {
        plans[rec.segment_id] = plan_windows(rec.duration_s);
    }
    const ObservationMap obs = load_observations(args.observations, manifest, plans);
    auto it = obs.find(args.segment);
    if (it == obs.end()) throw UnknownSegment("no observations for " + args.segment);

    auto mode = parse_mode(args.mode);
    auto shots = parse_shots(args.shots);
    auto mask = parse_mask_tag(args.mask);
    if (!mode) throw InvalidConfig("unknown mode '" + args.mode + "'");
    if (!shots) throw InvalidConfig("unknown shots '" + args.shots + "'");
    if (!mask) throw InvalidConfig("unknown mask tag '" + args.mask + "'");

    const std::filesystem::path assets =
        args.assets.empty() ? default_assets() : std::filesystem::path(args.assets);
    std::optional<OneShotExample> example;
    if (*shots == Shots::one) {
        example = load_one_shot_example(assets / "one_shot_example.json");
    }
    const PromptConfig config = make_prompt_config(*mode, *shots, *mask, std::move(example));
    const RenderedPrompt prompt = render_prompt(config, it->second);
    if (args.jsonl) {
        std::cout << json({{"segment_id", prompt.segment_id},
                           {"digest", prompt.config_digest},
                           {"text", prompt.text}})
                         .dump()
                  << '\n';
    } else {
        std::cout << prompt.text; // exact bytes, goldens depend on it
    }
    return kExitOk;
}

struct EmulateArgs {
    std::string manifest;
    std::string config;
    std::string out;
    std::int64_t seed = -1;
    bool jsonl = false;
};

int cmd_emulate(const EmulateArgs& args) {
    const Manifest manifest = load_manifest(args.manifest);
    EmulatorConfig cfg =
        args.config.empty() ? default_emulator_config() : load_emulator_config(args.config);
    if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
    const ObservationMap obs = emulate_all(manifest, cfg);
    save_observations(obs, args.out);
    emit(args.jsonl,
         {{"status", "ok"}, {"segments", obs.size()}, {"out", args.out}, {"seed", cfg.seed}},
         "wrote " + std::to_string(obs.size()) + " segments to " + args.out);
    return kExitOk;
}

struct RunArgs {
    std::string config;
    std::string out;
    std::string assets;
    std::vector<std::string> endpoints; // model=url overrides for http backends
    bool resume = false;
    bool jsonl = false;
};

int cmd_run(const RunArgs& args) {
    ExperimentConfig cfg = load_experiment_config(args.config);
    if (!args.out.empty()) cfg.out_dir = args.out;
    if (args.resume) cfg.resume = true;
    if (!args.assets.empty()) cfg.assets_dir = args.assets;
    if (cfg.assets_dir.empty()) cfg.assets_dir = default_assets();
    if (cfg.out_dir.empty()) cfg.out_dir = std::filesystem::path("runs") / cfg.run_id;

    for (const std::string& pair : args.endpoints) {
        const auto eq = pair.find('=');
        if (eq == std::string::npos) {
            throw InvalidConfig("--endpoint expects model=url, got '" + pair + "'");
        }
        const std::string model = pair.substr(0, eq);
        const std::string url = pair.substr(eq + 1);
        bool matched = false;
        auto apply = [&](BackendSpec& spec) {
            if (spec.model_id == model &&
                spec.config.kind == BackendKind::http_openai_compatible) {
                spec.config.endpoint_url = url;
                matched = true;
            }
        };
        for (auto& spec : cfg.backends) apply(spec);
        if (cfg.mapper) apply(*cfg.mapper);
        if (!matched) {
            throw InvalidConfig("--endpoint matched no http backend for model '" + model + "'");
        }
    }

    const RunResult result = run_experiment(cfg);
    if (args.jsonl) {
        json cells = json::array();
        for (const auto& [key, report] : result.results.cells) {
            cells.push_back({{"cell", cell_id(key)},
                             {"accuracy", report.accuracy},
                             {"macro_f1", report.macro_f1},
                             {"n", report.n}});
        }
        std::cout << json({{"status", "ok"},
                           {"run_dir", result.run_dir.string()},
                           {"records", result.total_records},
                           {"parse_failures", result.parse_failures},
                           {"cells", cells}})
                         .dump()
                  << '\n';
    } else {
        std::cout << emit_report(result.results, ReportFormat::plain_table);
        std::cout << "\nrun directory: " << result.run_dir.string() << '\n';
        std::cout << "records: " << result.total_records
                  << ", parse failures: " << result.parse_failures << '\n';
    }
    return kExitOk;
}

struct ReportArgs {
    std::string run_dir;
    std::string format = "plain";
    bool per_class = false;
    bool jsonl = false;
};

int cmd_report(const ReportArgs& args) {
    const ResultSet results = load_run_results(args.run_dir);
    auto format = parse_report_format(args.format);
    if (!format) throw InvalidConfig("unknown format '" + args.format + "'");
    const std::string doc = args.per_class ? emit_per_class_report(results, *format)
                                           : emit_report(results, *format);
    if (args.jsonl) {
        std::cout << json({{"status", "ok"}, {"document", doc}}).dump() << '\n';
    } else {
        std::cout << doc;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Batch evaluation harness for LLM late-fusion activity recognition"};
    app.require_subcommand(1);

    ValidateArgs validate_args;
    auto* validate = app.add_subcommand("validate", "Validate manifest and observation files");
    validate->add_option("--manifest", validate_args.manifest, "Segment manifest CSV")
        ->required();
    validate->add_option("--observations", validate_args.observations,
                         "Observations JSONL (optional)");
    validate->add_flag("--jsonl", validate_args.jsonl, "Machine-readable output");

    PromptArgs prompt_args;
    auto* prompt = app.add_subcommand("prompt", "Render one prompt to stdout");
    prompt->add_option("--manifest", prompt_args.manifest, "Segment manifest CSV")->required();
    prompt->add_option("--observations", prompt_args.observations, "Observations JSONL")
        ->required();
    prompt->add_option("--segment", prompt_args.segment, "Segment id")->required();
    prompt->add_option("--mode", prompt_args.mode, "closed|open");
    prompt->add_option("--shots", prompt_args.shots, "zero|one");
    prompt->add_option("--mask", prompt_args.mask, "Modality mask tag, e.g. clix, cli, c, l, i");
    prompt->add_option("--assets", prompt_args.assets, "Asset directory");
    prompt->add_flag("--jsonl", prompt_args.jsonl, "Machine-readable output");

    EmulateArgs emulate_args;
    auto* emulate = app.add_subcommand("emulate", "Generate synthetic observations");
    emulate->add_option("--manifest", emulate_args.manifest, "Segment manifest CSV")->required();
    emulate->add_option("--config", emulate_args.config, "Emulator config JSON");
    emulate->add_option("--out", emulate_args.out, "Output observations JSONL")->required();
    emulate->add_option("--seed", emulate_args.seed, "Override the config seed");
    emulate->add_flag("--jsonl", emulate_args.jsonl, "Machine-readable output");

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Run the experiment grid");
    run->add_option("--config", run_args.config, "Experiment config JSON")->required();
    run->add_option("--out", run_args.out, "Run directory (overrides config)");
    run->add_option("--assets", run_args.assets, "Asset directory");
    run->add_option("--endpoint", run_args.endpoints,
                    "Override an http backend endpoint, model=url (repeatable)");
    run->add_flag("--resume", run_args.resume, "Resume an interrupted run");
    run->add_flag("--jsonl", run_args.jsonl, "Machine-readable output");

    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "Re-emit tables from a run directory");
    report->add_option("--run-dir", report_args.run_dir, "Run directory")->required();
    report->add_option("--format", report_args.format, "plain|markdown|csv");
    report->add_flag("--per-class", report_args.per_class, "Per-activity tables");
    report->add_flag("--jsonl", report_args.jsonl, "Machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (validate->parsed()) return cmd_validate(validate_args);
        if (prompt->parsed()) return cmd_prompt(prompt_args);
        if (emulate->parsed()) return cmd_emulate(emulate_args);
        if (run->parsed()) return cmd_run(run_args);
        if (report->parsed()) return cmd_report(report_args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitValidation;
}
