#include "fusebench/jsonl.hpp"

#include "fusebench/errors.hpp"

#include <fstream>
#include <sstream>

namespace fusebench {

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in.good()) throw MissingFile(path.string());
    std::vector<json> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw MalformedEntry(path.string() + ":" + std::to_string(line_no) +
                                 ": not valid JSON");
        }
        out.push_back(std::move(j));
    }
    return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records) {
    std::string bytes;
    for (const auto& r : records) {
        bytes += r.dump();
        bytes += '\n';
    }
    atomic_write(path, bytes);
}

void append_jsonl(const std::filesystem::path& path, const json& record) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::app);
    if (!out.good()) throw MissingFile("cannot open for append: " + path.string());
    out << record.dump() << '\n';
}

void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out.good()) throw MissingFile("cannot open for write: " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) throw MissingFile(path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace fusebench
