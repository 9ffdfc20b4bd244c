#include "sppl/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "sppl/errors.hpp"

namespace sppl {

namespace {

bool is_blank(const std::string& line) {
    return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

} // namespace

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const json&, size_t)>& fn) {
    std::ifstream in(path);
    if (!in) {
        throw ArtifactError("cannot open file: " + path.string());
    }
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (is_blank(line)) {
            continue;
        }
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded()) {
            throw ConfigError(path.filename().string() + ":" + std::to_string(lineno) +
                              ": malformed JSON record");
        }
        fn(record, lineno);
    }
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::vector<json> records;
    for_each_jsonl(path, [&](const json& r, size_t) { records.push_back(r); });
    return records;
}

void append_jsonl(const std::filesystem::path& path, const json& record) {
    std::ofstream out(path, std::ios::app);
    if (!out) {
        throw ArtifactError("cannot open file for append: " + path.string());
    }
    out << record.dump() << "\n";
    if (!out) {
        throw ArtifactError("write failed: " + path.string());
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ArtifactError("cannot open file for write: " + path.string());
        }
        out << contents;
        if (!out) {
            throw ArtifactError("write failed: " + path.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

std::string dump_stable(const json& doc) {
    // nlohmann::json keeps object keys in sorted order already
    return doc.dump(2) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ArtifactError("cannot open file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace sppl
