#include "rageval/jsonl.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <sstream>

namespace rageval {

void for_each_jsonl(const std::filesystem::path& path,
                    const std::function<void(const json&, size_t)>& fn) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path.string());
    std::string line;
    size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded())
            throw parse_error(path.string() + ":" + std::to_string(line_number) +
                              ": malformed JSON");
        fn(record, line_number);
    }
}

jsonl_writer::jsonl_writer(const std::filesystem::path& path, bool append) { open(path, append); }

void jsonl_writer::open(const std::filesystem::path& path, bool append) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    out_.open(path, append ? std::ios::app : std::ios::trunc);
    if (!out_) throw validation_error("cannot open " + path.string() + " for writing");
    path_ = path;
}

void jsonl_writer::write(const json& record) {
    out_ << record.dump() << '\n';
    out_.flush();
    if (!out_) throw validation_error("write failed on " + path_.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw validation_error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw validation_error("write failed on " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

} // namespace rageval
