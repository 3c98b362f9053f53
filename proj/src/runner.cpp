#include "fusebench/runner.hpp"

#include "fusebench/errors.hpp"
#include "fusebench/jsonl.hpp"
#include "fusebench/parse.hpp"
#include "fusebench/rng.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>
#include <unordered_set>

namespace fusebench {
namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

BackendSpec backend_spec_from_json(const json& j, const std::filesystem::path& base_dir) {
    BackendSpec spec;
    spec.config = backend_config_from_json(j.at("backend"));
    spec.model_id = j.at("model").get<std::string>();
    for (auto& p : spec.config.transcript_paths) p = resolve(base_dir, p).string();
    if (!spec.config.script_path.empty()) {
        spec.config.script_path = resolve(base_dir, spec.config.script_path).string();
    }
    return spec;
}

json backend_spec_to_json(const BackendSpec& spec) {
    return {{"backend", backend_config_to_json(spec.config)}, {"model", spec.model_id}};
}

struct Cell {
    CellKey key;
    std::string id;       // filesystem name
    std::string ablation; // transcript tag
};

struct RunPaths {
    std::filesystem::path root;
    std::filesystem::path records_dir;
    std::filesystem::path metrics_dir;
    std::filesystem::path reports_dir;

    std::filesystem::path records(const std::string& cell) const {
        return records_dir / (cell + ".jsonl");
    }
    std::filesystem::path partial(const std::string& cell) const {
        return records_dir / (cell + ".partial.jsonl");
    }
    std::filesystem::path metrics(const std::string& cell) const {
        return metrics_dir / (cell + ".json");
    }
};

std::vector<PredictionRecord> load_records(const std::filesystem::path& path) {
    std::vector<PredictionRecord> out;
    for (const auto& j : read_jsonl(path)) out.push_back(prediction_record_from_json(j));
    return out;
}

void sort_records(std::vector<PredictionRecord>& records) {
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        if (a.ablation_id != b.ablation_id) return a.ablation_id < b.ablation_id;
        return a.segment_id < b.segment_id;
    });
}

// Records carry no volatile fields, so the snapshot written on a fresh run
// must match byte-wise on resume.
json config_snapshot(const ExperimentConfig& cfg) {
    json j = experiment_config_to_json(cfg);
    j.erase("out_dir");
    j.erase("resume");
    return j;
}

} // namespace

ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;
    cfg.run_id = j.value("run_id", "run");
    cfg.manifest_path = resolve(base_dir, j.value("manifest", ""));
    cfg.observations_path = resolve(base_dir, j.value("observations", ""));
    cfg.emulator_config_path = resolve(base_dir, j.value("emulator_config", ""));
    cfg.assets_dir = resolve(base_dir, j.value("assets", ""));
    cfg.out_dir = resolve(base_dir, j.value("out_dir", ""));

    if (!j.contains("backends") || j["backends"].empty()) {
        throw InvalidConfig("experiment config needs at least one backend");
    }
    for (const auto& b : j["backends"]) {
        cfg.backends.push_back(backend_spec_from_json(b, base_dir));
    }
    if (j.contains("mapper")) cfg.mapper = backend_spec_from_json(j["mapper"], base_dir);

    if (j.contains("modes")) {
        cfg.modes.clear();
        for (const auto& m : j["modes"]) {
            auto mode = parse_mode(m.get<std::string>());
            if (!mode) throw InvalidConfig("unknown mode '" + m.get<std::string>() + "'");
            cfg.modes.push_back(*mode);
        }
    }
    if (j.contains("shots")) {
        cfg.shots.clear();
        for (const auto& s : j["shots"]) {
            auto shots = parse_shots(s.get<std::string>());
            if (!shots) throw InvalidConfig("unknown shots '" + s.get<std::string>() + "'");
            cfg.shots.push_back(*shots);
        }
    }
    if (j.contains("ablations")) {
        cfg.ablations.clear();
        for (const auto& a : j["ablations"]) {
            auto mask = parse_mask_tag(a.get<std::string>());
            if (!mask) throw InvalidConfig("unknown ablation tag '" + a.get<std::string>() + "'");
            cfg.ablations.push_back(*mask);
        }
    }
    if (cfg.ablations.empty()) throw InvalidConfig("ablation list must be non-empty");
    if (cfg.modes.empty() || cfg.shots.empty()) {
        throw InvalidConfig("modes and shots must be non-empty");
    }

    if (j.contains("eval")) {
        const auto& e = j["eval"];
        cfg.eval.replicates = e.value("replicates", std::size_t{10000});
        cfg.eval.seed = e.value("seed", std::uint64_t{0});
        cfg.eval.alpha = e.value("alpha", 0.05);
    }
    cfg.temperature = j.value("temperature", 0.0);
    cfg.max_output_tokens = j.value("max_output_tokens", 4096);
    cfg.max_in_flight = j.value("max_in_flight", 1);
    cfg.resume = j.value("resume", false);
    return cfg;
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["run_id"] = cfg.run_id;
    j["manifest"] = cfg.manifest_path.string();
    if (!cfg.observations_path.empty()) j["observations"] = cfg.observations_path.string();
    if (!cfg.emulator_config_path.empty()) {
        j["emulator_config"] = cfg.emulator_config_path.string();
    }
    if (!cfg.assets_dir.empty()) j["assets"] = cfg.assets_dir.string();
    if (!cfg.out_dir.empty()) j["out_dir"] = cfg.out_dir.string();
    j["backends"] = json::array();
    for (const auto& b : cfg.backends) j["backends"].push_back(backend_spec_to_json(b));
    if (cfg.mapper) j["mapper"] = backend_spec_to_json(*cfg.mapper);
    j["modes"] = json::array();
    for (auto m : cfg.modes) j["modes"].push_back(std::string(mode_string(m)));
    j["shots"] = json::array();
    for (auto s : cfg.shots) j["shots"].push_back(std::string(shots_string(s)));
    j["ablations"] = json::array();
    for (const auto& a : cfg.ablations) j["ablations"].push_back(mask_tag(a));
    j["eval"] = {{"replicates", cfg.eval.replicates},
                 {"seed", cfg.eval.seed},
                 {"alpha", cfg.eval.alpha}};
    j["temperature"] = cfg.temperature;
    j["max_output_tokens"] = cfg.max_output_tokens;
    j["max_in_flight"] = cfg.max_in_flight;
    return j;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    json j = json::parse(read_file(path));
    return experiment_config_from_json(j, path.parent_path());
}

RunResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.out_dir.empty()) throw InvalidConfig("experiment config needs out_dir");
    if (cfg.backends.empty()) throw InvalidConfig("no backends configured");

    const Manifest manifest = load_manifest(cfg.manifest_path);
    if (manifest.records.empty()) throw InvalidConfig("manifest has no segments");

    PlanMap plans;
    for (const auto& rec : manifest.records) {
        plans[rec.segment_id] = plan_windows(rec.duration_s);
    }

    ObservationMap observations;
    if (!cfg.emulator_config_path.empty()) {
        observations = emulate_all(manifest, load_emulator_config(cfg.emulator_config_path));
    } else if (!cfg.observations_path.empty()) {
        observations = load_observations(cfg.observations_path, manifest, plans);
    } else {
        throw InvalidConfig("config needs observations or emulator_config");
    }
    for (const auto& rec : manifest.records) {
        if (!observations.count(rec.segment_id)) {
            throw UnknownSegment("no observations for segment " + rec.segment_id);
        }
    }

    RunPaths paths{cfg.out_dir, cfg.out_dir / "records", cfg.out_dir / "metrics",
                   cfg.out_dir / "reports"};
    const auto snapshot_path = paths.root / "config.json";
    const json snapshot = config_snapshot(cfg);
    if (std::filesystem::exists(snapshot_path)) {
        if (!cfg.resume) {
            throw InvalidConfig("run directory already holds a run; pass resume to continue");
        }
        if (json::parse(read_file(snapshot_path)) != snapshot) {
            throw InvalidConfig("resume config differs from the run directory snapshot");
        }
    } else {
        std::filesystem::create_directories(paths.root);
        atomic_write(snapshot_path, snapshot.dump(2) + "\n");
        if (!cfg.emulator_config_path.empty()) {
            save_observations(observations, paths.root / "observations.jsonl");
        }
    }
    std::filesystem::create_directories(paths.records_dir);
    std::filesystem::create_directories(paths.metrics_dir);
    std::filesystem::create_directories(paths.reports_dir);

    LlmClientOptions client_options;
    client_options.run_id = cfg.run_id;
    client_options.cache_dir = paths.root / "cache";
    client_options.transcript_path = paths.root / "transcripts.jsonl";
    LlmClient client(client_options);

    struct ActiveBackend {
        std::string backend_id;
        std::string model_id;
    };
    std::vector<ActiveBackend> active;
    for (const auto& spec : cfg.backends) {
        BackendConfig bcfg = spec.config;
        bcfg.max_in_flight = std::max(bcfg.max_in_flight, cfg.max_in_flight);
        active.push_back({client.register_backend(bcfg, &manifest), spec.model_id});
    }
    std::optional<ActiveBackend> mapper;
    if (cfg.mapper) {
        mapper = ActiveBackend{client.register_backend(cfg.mapper->config, &manifest),
                               cfg.mapper->model_id};
    }

    if (cfg.assets_dir.empty()) throw InvalidConfig("experiment config needs assets dir");
    const OneShotExample one_shot =
        load_one_shot_example(cfg.assets_dir / "one_shot_example.json");
    const std::string mapping_template =
        load_mapping_template(cfg.assets_dir / "mapping_prompt.txt");

    std::vector<std::pair<Cell, ActiveBackend>> cells;
    for (const auto& backend : active) {
        for (PromptMode mode : cfg.modes) {
            for (Shots shots : cfg.shots) {
                for (const ModalityMask& mask : cfg.ablations) {
                    if (!mask.any()) throw InvalidConfig("empty ablation mask");
                    Cell cell;
                    cell.key = {backend.backend_id, backend.model_id, mode, shots, mask};
                    cell.id = cell_id(cell.key);
                    cell.ablation = ablation_id(mode, shots, mask);
                    cells.push_back({cell, backend});
                }
            }
        }
    }

    const std::vector<ActivityLabel> label_list = closed_set_prompt_order();
    RunResult result;
    result.run_dir = paths.root;

    for (const auto& [cell, backend] : cells) {
        std::vector<PredictionRecord> records;
        if (std::filesystem::exists(paths.records(cell.id))) {
            records = load_records(paths.records(cell.id));
        } else {
            std::unordered_set<std::string> done;
            if (cfg.resume && std::filesystem::exists(paths.partial(cell.id))) {
                records = load_records(paths.partial(cell.id));
                for (const auto& r : records) done.insert(r.segment_id);
            }

            PromptConfig prompt_config = make_prompt_config(
                cell.key.mode, cell.key.shots, cell.key.mask,
                cell.key.shots == Shots::one ? std::optional<OneShotExample>(one_shot)
                                             : std::nullopt);

            std::vector<const SegmentRecord*> pending;
            for (const auto& seg : manifest.records) {
                if (!done.count(seg.segment_id)) pending.push_back(&seg);
            }

            std::mutex sink_mutex;
            std::atomic<std::size_t> next{0};
            auto worker = [&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= pending.size()) return;
                    const SegmentRecord& seg = *pending[i];
                    PredictionRecord record;
                    record.segment_id = seg.segment_id;
                    record.truth = seg.label;
                    record.ablation_id = cell.ablation;
                    try {
                        RenderedPrompt prompt =
                            render_prompt(prompt_config, observations.at(seg.segment_id));
                        ChatRequest req;
                        req.backend_id = backend.backend_id;
                        req.model_id = backend.model_id;
                        req.prompt = std::move(prompt);
                        req.temperature = cfg.temperature;
                        req.max_output_tokens = cfg.max_output_tokens;
                        req.tag = cell.ablation;
                        ChatResponse resp = client.complete(req);

                        RawAnswer raw = extract_answer(resp.text);
                        if (cell.key.mode == PromptMode::closed_set) {
                            record.predicted = resolve_closed(raw, label_list);
                        } else {
                            MapperConfig mc;
                            mc.backend_id =
                                mapper ? mapper->backend_id : backend.backend_id;
                            mc.model_id = mapper ? mapper->model_id : backend.model_id;
                            mc.mapping_template = mapping_template;
                            mc.temperature = cfg.temperature;
                            mc.tag = cell.ablation + "#mapper";
                            mc.segment_id = seg.segment_id;
                            record.predicted =
                                map_open_label(raw.text, label_list, client, mc);
                        }
                    } catch (const EmptyResponse& e) {
                        record.predicted = {
                            ParseFailure{ParseFailureReason::empty_response, e.what()}};
                    } catch (const Error& e) {
                        record.predicted = {
                            ParseFailure{ParseFailureReason::transport, e.what()}};
                    }
                    std::lock_guard lock(sink_mutex);
                    append_jsonl(paths.partial(cell.id), prediction_record_to_json(record));
                    records.push_back(std::move(record));
                }
            };

            const std::size_t n_threads =
                std::min<std::size_t>(std::max(cfg.max_in_flight, 1), pending.size());
            if (n_threads <= 1) {
                worker();
            } else {
                std::vector<std::thread> threads;
                for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
                for (auto& t : threads) t.join();
            }

            sort_records(records);
            std::vector<json> lines;
            lines.reserve(records.size());
            for (const auto& r : records) lines.push_back(prediction_record_to_json(r));
            write_jsonl(paths.records(cell.id), lines);
            std::filesystem::remove(paths.partial(cell.id));
        }

        BootstrapParams cell_eval = cfg.eval;
        cell_eval.seed = substream_seed(cfg.eval.seed, fnv1a64(cell.ablation));
        MetricsReport report = evaluate(records, cell_eval);
        atomic_write(paths.metrics(cell.id), metrics_report_to_json(report).dump(2) + "\n");

        result.total_records += records.size();
        for (const auto& r : records) {
            if (r.predicted.is_failure()) ++result.parse_failures;
        }
        result.results.cells.push_back({cell.key, std::move(report)});
    }

    for (auto format : {ReportFormat::plain_table, ReportFormat::markdown, ReportFormat::csv}) {
        const char* ext = format == ReportFormat::plain_table ? "txt"
                          : format == ReportFormat::markdown  ? "md"
                                                              : "csv";
        atomic_write(paths.reports_dir / (std::string("report.") + ext),
                     emit_report(result.results, format));
        atomic_write(paths.reports_dir / (std::string("per_class.") + ext),
                     emit_per_class_report(result.results, format));
    }

    // Run-level metrics in the line-delimited record family, one cell per line.
    std::vector<json> metric_lines;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        metric_lines.push_back({{"cell", cells[i].first.id},
                                {"backend_id", cells[i].first.key.backend_id},
                                {"model_id", cells[i].first.key.model_id},
                                {"ablation_id", cells[i].first.ablation},
                                {"report", metrics_report_to_json(result.results.cells[i].second)}});
    }
    write_jsonl(paths.root / "metrics.jsonl", metric_lines);

    json state;
    state["run_id"] = cfg.run_id;
    state["cells"] = json::array();
    for (const auto& [cell, backend] : cells) {
        state["cells"].push_back({{"cell", cell.id}, {"status", "complete"}});
    }
    atomic_write(paths.root / "run_state.json", state.dump(2) + "\n");
    return result;
}

ResultSet load_run_results(const std::filesystem::path& run_dir) {
    // Metrics files are keyed by cell id: <backend>__<model>__<mode>-<shots>-<mask>.
    ResultSet out;
    const auto metrics_dir = run_dir / "metrics";
    if (!std::filesystem::exists(metrics_dir)) {
        throw MissingFile(metrics_dir.string());
    }
    std::vector<std::filesystem::path> files;
    const auto state_path = run_dir / "run_state.json";
    if (std::filesystem::exists(state_path)) {
        // Preserve the grid order the run used.
        const json state = json::parse(read_file(state_path));
        for (const auto& cell : state.at("cells")) {
            const auto file = metrics_dir / (cell.at("cell").get<std::string>() + ".json");
            if (std::filesystem::exists(file)) files.push_back(file);
        }
    } else {
        for (const auto& entry : std::filesystem::directory_iterator(metrics_dir)) {
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
    }
    for (const auto& file : files) {
        const std::string stem = file.stem().string();
        const auto first = stem.find("__");
        const auto second = stem.rfind("__");
        if (first == std::string::npos || second == first) continue;
        CellKey key;
        key.backend_id = stem.substr(0, first);
        key.model_id = stem.substr(first + 2, second - first - 2);
        const std::string abl = stem.substr(second + 2);
        const auto d1 = abl.find('-');
        const auto d2 = abl.rfind('-');
        if (d1 == std::string::npos || d2 == d1) continue;
        auto mode = parse_mode(abl.substr(0, d1));
        auto shots = parse_shots(abl.substr(d1 + 1, d2 - d1 - 1));
        auto mask = parse_mask_tag(abl.substr(d2 + 1));
        if (!mode || !shots || !mask) continue;
        key.mode = *mode;
        key.shots = *shots;
        key.mask = *mask;
        out.cells.push_back({key, metrics_report_from_json(json::parse(read_file(file)))});
    }
    if (out.cells.empty()) throw EmptyResults("no metrics found under " + run_dir.string());
    return out;
}

} // namespace fusebench
