#pragma once

#include "fusebench/eval.hpp"
#include "fusebench/jsonl.hpp"
#include "fusebench/manifest.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fusebench::test {

#ifndef FUSEBENCH_ASSET_DIR
#define FUSEBENCH_ASSET_DIR "assets"
#endif
#ifndef FUSEBENCH_CONFIG_DIR
#define FUSEBENCH_CONFIG_DIR "configs"
#endif

inline std::filesystem::path asset_dir() { return FUSEBENCH_ASSET_DIR; }
inline std::filesystem::path config_dir() { return FUSEBENCH_CONFIG_DIR; }

// Unique directory under the system temp root, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& hint = "fusebench") {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                (hint + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Recursively drops wall-clock fields so run directories compare stably.
inline void strip_volatile(nlohmann::json& j) {
    if (j.is_object()) {
        j.erase("ts");
        j.erase("latency_ms");
        for (auto& [key, value] : j.items()) strip_volatile(value);
    } else if (j.is_array()) {
        for (auto& value : j) strip_volatile(value);
    }
}

// Relative path -> normalized content for every regular file under root.
// JSON and JSONL files are parsed and re-dumped with volatile fields
// removed; anything else is raw bytes.
inline std::map<std::string, std::string> normalized_dir_snapshot(
    const std::filesystem::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        const std::string rel = std::filesystem::relative(entry.path(), root).string();
        const std::string ext = entry.path().extension().string();
        std::string content = slurp(entry.path());
        if (ext == ".json") {
            auto j = nlohmann::json::parse(content);
            strip_volatile(j);
            content = j.dump();
        } else if (ext == ".jsonl") {
            std::istringstream in(content);
            std::string line;
            std::string normalized;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                auto j = nlohmann::json::parse(line);
                strip_volatile(j);
                normalized += j.dump();
                normalized += '\n';
            }
            content = normalized;
        }
        out[rel] = std::move(content);
    }
    return out;
}

// CSV manifest text with `per_class` rows for each of the 12 activities,
// 20-second segments.
inline std::string balanced_manifest_text(std::size_t per_class) {
    std::string out = "segment_id,video_id,start_s,duration_s,label\n";
    std::size_t n = 0;
    for (ActivityLabel label : all_activities()) {
        std::string slug;
        for (char c : std::string(canonical_string(label))) {
            slug += std::isalnum(static_cast<unsigned char>(c))
                        ? static_cast<char>(std::tolower(static_cast<unsigned char>(c)))
                        : '-';
        }
        for (std::size_t i = 0; i < per_class; ++i) {
            ++n;
            out += "seg-" + slug + "-" + std::to_string(i) + ",video-" + std::to_string(n) +
                   "," + std::to_string(i * 25) + ",20," + std::string(canonical_string(label)) +
                   "\n";
        }
    }
    return out;
}

} // namespace fusebench::test
