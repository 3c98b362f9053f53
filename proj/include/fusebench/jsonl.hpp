#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace fusebench {

using json = nlohmann::json;

// Line-delimited JSON: one compact object per line, LF endings. Used by the
// observations, transcript, record, and metrics files.

std::vector<json> read_jsonl(const std::filesystem::path& path);

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records);

// Appends one record; creates the file (and parent directories) on first use.
void append_jsonl(const std::filesystem::path& path, const json& record);

// Writes bytes to a temp file in the target directory, then renames over the
// destination so readers never observe a torn file.
void atomic_write(const std::filesystem::path& path, const std::string& bytes);

std::string read_file(const std::filesystem::path& path);

} // namespace fusebench
