#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include "json.hpp"

#include "rageval/errors.hpp"

namespace rageval {

using json = nlohmann::json;

// Calls fn(record, line_number) for every non-blank line. Line numbers are
// 1-based. Throws parse_error naming the line on malformed JSON.
void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const json&, size_t)>& fn);

// Append-friendly line writer; every line is flushed so a killed process
// loses at most the record being written.
class jsonl_writer {
public:
    jsonl_writer() = default;
    explicit jsonl_writer(const std::filesystem::path& path, bool append = false);

    void open(const std::filesystem::path& path, bool append = false);
    void write(const json& record);
    bool is_open() const { return out_.is_open(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::ofstream out_;
    std::filesystem::path path_;
};

// Whole-file helpers. write_text_atomic writes to a temp sibling then renames.
std::string read_text(const std::filesystem::path& path);
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

// ISO-8601 UTC timestamp, second resolution.
std::string utc_timestamp();

} // namespace rageval
