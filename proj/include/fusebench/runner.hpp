#pragma once

#include "fusebench/emulator.hpp"
#include "fusebench/llm.hpp"
#include "fusebench/report.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fusebench {

struct BackendSpec {
    BackendConfig config;
    std::string model_id;
};

struct ExperimentConfig {
    std::string run_id = "run";
    std::filesystem::path manifest_path;
    std::filesystem::path observations_path;   // precomputed modality outputs
    std::filesystem::path emulator_config_path; // or synthesize them
    std::vector<BackendSpec> backends;
    std::optional<BackendSpec> mapper; // open-ended label mapping; defaults to the cell's model
    std::vector<PromptMode> modes{PromptMode::closed_set};
    std::vector<Shots> shots{Shots::one};
    std::vector<ModalityMask> ablations = default_ablations();
    BootstrapParams eval;
    double temperature = 0.0;
    int max_output_tokens = 4096;
    int max_in_flight = 1;
    bool resume = false;
    std::filesystem::path assets_dir; // one-shot example + mapping template
    std::filesystem::path out_dir;    // run directory
};

// Parses the config file; relative paths resolve against `base_dir`.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct RunResult {
    ResultSet results;
    std::filesystem::path run_dir;
    std::size_t total_records = 0;
    std::size_t parse_failures = 0;
};

// Runs the full grid (backends x modes x shots x ablations) over every
// manifest segment: mask, render, complete, parse (mapping open-ended
// answers), record, then score each cell. Everything lands under the run
// directory: config snapshot, transcripts, response cache, per-cell records
// (sorted), per-cell metrics, and the report files. Per-segment failures
// become scored parse_failure records; only configuration errors abort.
// A resumed run re-serves completed work from the response cache and never
// re-sends a cached prompt.
RunResult run_experiment(const ExperimentConfig& cfg);

// Rebuilds the ResultSet of a finished (or partially finished) run directory
// from its metrics files.
ResultSet load_run_results(const std::filesystem::path& run_dir);

} // namespace fusebench
