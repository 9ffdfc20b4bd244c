#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace sppl {

using json = nlohmann::json;

/// Parses a JSON-lines file. Calls fn(record, line_number) per non-blank line;
/// line numbers are 1-based. Throws ConfigError naming the line on parse failure,
/// ArtifactError if the file cannot be opened.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const json&, size_t)>& fn);

std::vector<json> read_jsonl(const std::filesystem::path& path);

/// Appends one compact JSON line. Keys are emitted sorted, so output is
/// byte-stable for equal records.
void append_jsonl(const std::filesystem::path& path, const json& record);

/// Writes a whole file atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Serializes a JSON document with sorted keys and 2-space indent; byte-stable.
std::string dump_stable(const json& doc);

std::string read_file(const std::filesystem::path& path);

} // namespace sppl
