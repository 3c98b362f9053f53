#include "fusebench/report.hpp"

#include "fusebench/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace fusebench {
namespace {

constexpr std::string_view kCheck = "✓"; // ✓
constexpr std::string_view kCross = "✗"; // ✗

long long percent(double v) { return std::llround(v * 100.0); }

std::string group_title(PromptMode mode, Shots shots) {
    std::string title = mode == PromptMode::closed_set ? "Closed-set" : "Open-ended";
    title += " activity classification, ";
    title += shots == Shots::one ? "one-shot" : "zero-shot";
    title += " setting (95% CIs)";
    return title;
}

std::string mask_cell(bool on, ReportFormat format) {
    if (format == ReportFormat::csv) return on ? "yes" : "no";
    return std::string(on ? kCheck : kCross);
}

// Rendered width in terminal columns; the check/cross glyphs count as one.
std::size_t display_width(const std::string& s) {
    std::size_t width = 0;
    for (unsigned char c : s) {
        if ((c & 0xC0) != 0x80) ++width;
    }
    return width;
}

std::string pad(const std::string& s, std::size_t width) {
    std::string out = s;
    const std::size_t w = display_width(s);
    if (w < width) out.append(width - w, ' ');
    return out;
}

std::string plain_table(const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) widths[i] = display_width(header[i]);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            widths[i] = std::max(widths[i], display_width(row[i]));
        }
    }
    std::ostringstream out;
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "  " : "") << pad(row[i], widths[i]);
        }
        out << '\n';
    };
    emit_row(header);
    std::size_t rule = 0;
    for (std::size_t i = 0; i < widths.size(); ++i) rule += widths[i] + (i ? 2 : 0);
    out << std::string(rule, '-') << '\n';
    for (const auto& row : rows) emit_row(row);
    return out.str();
}

std::string markdown_table(const std::vector<std::string>& header,
                           const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    out << '|';
    for (const auto& h : header) out << ' ' << h << " |";
    out << "\n|";
    for (std::size_t i = 0; i < header.size(); ++i) out << " --- |";
    out << '\n';
    for (const auto& row : rows) {
        out << '|';
        for (const auto& cell : row) out << ' ' << cell << " |";
        out << '\n';
    }
    return out.str();
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            const bool quote = row[i].find(',') != std::string::npos;
            if (quote) out << '"' << row[i] << '"';
            else out << row[i];
        }
        out << '\n';
    };
    emit_row(header);
    for (const auto& row : rows) emit_row(row);
    return out.str();
}

std::string render_table(ReportFormat format, const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
    switch (format) {
    case ReportFormat::plain_table: return plain_table(header, rows);
    case ReportFormat::markdown: return markdown_table(header, rows);
    case ReportFormat::csv: return csv_table(header, rows);
    }
    return {};
}

using Group = std::vector<const std::pair<CellKey, MetricsReport>*>;

std::map<std::pair<int, int>, Group> group_by_setting(const ResultSet& results) {
    std::map<std::pair<int, int>, Group> groups;
    for (const auto& cell : results.cells) {
        groups[{static_cast<int>(cell.first.mode), static_cast<int>(cell.first.shots)}]
            .push_back(&cell);
    }
    return groups;
}

} // namespace

std::string ablation_id(PromptMode mode, Shots shots, const ModalityMask& mask) {
    std::string id(mode == PromptMode::closed_set ? "closed" : "open");
    id += '-';
    id += shots_string(shots);
    id += '-';
    id += mask_tag(mask);
    return id;
}

std::string cell_id(const CellKey& key) {
    std::string model = key.model_id;
    for (char& c : model) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
    }
    return key.backend_id + "__" + model + "__" + ablation_id(key.mode, key.shots, key.mask);
}

std::optional<ReportFormat> parse_report_format(std::string_view text) {
    if (text == "plain" || text == "plain_table" || text == "table") {
        return ReportFormat::plain_table;
    }
    if (text == "markdown" || text == "md") return ReportFormat::markdown;
    if (text == "csv") return ReportFormat::csv;
    return std::nullopt;
}

std::string format_percent_cell(double point, const ConfidenceInterval& ci) {
    std::ostringstream out;
    out << percent(point) << " (" << percent(ci.lo) << ", " << percent(ci.hi) << ")";
    return out.str();
}

std::string format_fraction(double v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string emit_report(const ResultSet& results, ReportFormat format) {
    if (results.cells.empty()) throw EmptyResults("no cells to report");

    const std::vector<std::string> header = {"Model",       "Audio Caption", "Audio Labels",
                                             "IMU Activity", "Extra Context", "Accuracy (%)",
                                             "Macro-F1 (%)"};
    std::ostringstream out;
    bool first = true;
    for (const auto& [setting, group] : group_by_setting(results)) {
        const auto mode = static_cast<PromptMode>(setting.first);
        const auto shots = static_cast<Shots>(setting.second);
        std::vector<std::vector<std::string>> rows;
        for (const auto* cell : group) {
            const auto& [key, report] = *cell;
            rows.push_back({key.model_id, mask_cell(key.mask.audio_caption, format),
                            mask_cell(key.mask.audio_labels, format),
                            mask_cell(key.mask.imu, format),
                            mask_cell(key.mask.extra_context, format),
                            format_percent_cell(report.accuracy, report.accuracy_ci),
                            format_percent_cell(report.macro_f1, report.macro_f1_ci)});
        }
        if (!first) out << '\n';
        first = false;
        if (format == ReportFormat::markdown) {
            out << "## " << group_title(mode, shots) << "\n\n";
        } else if (format == ReportFormat::plain_table) {
            out << group_title(mode, shots) << '\n';
        } else {
            out << "# " << group_title(mode, shots) << '\n';
        }
        out << render_table(format, header, rows);
    }
    return out.str();
}

std::string emit_per_class_report(const ResultSet& results, ReportFormat format) {
    if (results.cells.empty()) throw EmptyResults("no cells to report");

    const std::vector<std::string> header = {"High-level Activity", "Audio Caption",
                                             "Audio Labels",        "IMU Activity",
                                             "Extra Context",       "Precision",
                                             "Recall",              "F1"};
    // Group rows per (mode, shots, model), masks listed per activity.
    std::map<std::tuple<int, int, std::string>, Group> groups;
    for (const auto& cell : results.cells) {
        groups[{static_cast<int>(cell.first.mode), static_cast<int>(cell.first.shots),
                cell.first.model_id}]
            .push_back(&cell);
    }

    std::ostringstream out;
    bool first = true;
    for (const auto& [key, group] : groups) {
        const auto mode = static_cast<PromptMode>(std::get<0>(key));
        const auto shots = static_cast<Shots>(std::get<1>(key));
        const std::string& model = std::get<2>(key);

        std::vector<std::vector<std::string>> rows;
        for (ActivityLabel label : all_activities()) {
            for (const auto* cell : group) {
                const auto& [cell_key, report] = *cell;
                auto it = report.per_class.find(label);
                if (it == report.per_class.end()) continue;
                rows.push_back({std::string(dataset_name(label)),
                                mask_cell(cell_key.mask.audio_caption, format),
                                mask_cell(cell_key.mask.audio_labels, format),
                                mask_cell(cell_key.mask.imu, format),
                                mask_cell(cell_key.mask.extra_context, format),
                                format_fraction(it->second.precision),
                                format_fraction(it->second.recall),
                                format_fraction(it->second.f1)});
            }
        }
        if (!first) out << '\n';
        first = false;
        const std::string title = "Per-activity performance, " +
                                  std::string(mode == PromptMode::closed_set ? "closed-set"
                                                                             : "open-ended") +
                                  " " + std::string(shots_string(shots)) + "-shot, " + model;
        if (format == ReportFormat::markdown) {
            out << "## " << title << "\n\n";
        } else if (format == ReportFormat::plain_table) {
            out << title << '\n';
        } else {
            out << "# " << title << '\n';
        }
        out << render_table(format, header, rows);
    }
    return out.str();
}

} // namespace fusebench
