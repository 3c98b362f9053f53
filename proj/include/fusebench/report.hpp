#pragma once

#include "fusebench/eval.hpp"
#include "fusebench/prompt.hpp"

#include <string>
#include <vector>

namespace fusebench {

// One grid cell of the experiment: backend x mode x shots x mask.
struct CellKey {
    std::string backend_id;
    std::string model_id;
    PromptMode mode = PromptMode::closed_set;
    Shots shots = Shots::one;
    ModalityMask mask;
};

// "closed-one-cli" style tag; the transcript/record ablation id.
std::string ablation_id(PromptMode mode, Shots shots, const ModalityMask& mask);

// Filesystem-safe unique cell name.
std::string cell_id(const CellKey& key);

struct ResultSet {
    std::vector<std::pair<CellKey, MetricsReport>> cells;
};

enum class ReportFormat { plain_table, markdown, csv };

std::optional<ReportFormat> parse_report_format(std::string_view text);

// "68 (59, 76)": percentages rounded half-away-from-zero to integers.
std::string format_percent_cell(double point, const ConfidenceInterval& ci);

// Two-decimal fraction, e.g. "0.44".
std::string format_fraction(double v);

// Main table: one row per (model, mask) with modality check/cross cells and
// the accuracy / macro-F1 percent cells, grouped by (mode, shots).
// Throws EmptyResults.
std::string emit_report(const ResultSet& results, ReportFormat format);

// Appendix-style per-activity tables: precision/recall/F1 to 2 decimals per
// (activity, mask) row, grouped by (mode, shots, model). Throws EmptyResults.
std::string emit_per_class_report(const ResultSet& results, ReportFormat format);

} // namespace fusebench
