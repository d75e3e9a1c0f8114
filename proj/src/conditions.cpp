#include "rageval/conditions.hpp"

#include <charconv>
#include <vector>

namespace rageval {

std::string retrieved_label(int k, const std::string& ordering) {
    return "retrieved:k=" + std::to_string(k) + ":" + ordering;
}

std::string sweep_label(int k, int position) {
    return "sweep:k=" + std::to_string(k) + ":i=" + std::to_string(position);
}

std::string oracle_label(const std::string& mode, int k) {
    if (k <= 0) return mode;
    return mode + ":k=" + std::to_string(k);
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (true) {
        size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

bool parse_int(const std::string& s, int& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && out > 0;
}

} // namespace

std::optional<ParsedLabel> parse_label(const std::string& label) {
    auto parts = split(label, ':');
    ParsedLabel parsed;
    parsed.mode = parts[0];
    auto take_k = [&](const std::string& part) {
        return part.rfind("k=", 0) == 0 && parse_int(part.substr(2), parsed.k);
    };
    if (parsed.mode == "retrieved") {
        if (parts.size() != 3 || !take_k(parts[1])) return std::nullopt;
        if (parts[2] != "standard" && parts[2] != "reverse" && parts[2] != "random")
            return std::nullopt;
        parsed.ordering = parts[2];
        return parsed;
    }
    if (parsed.mode == "sweep") {
        if (parts.size() != 3 || !take_k(parts[1])) return std::nullopt;
        if (parts[2].rfind("i=", 0) != 0 || !parse_int(parts[2].substr(2), parsed.position))
            return std::nullopt;
        return parsed;
    }
    if (parsed.mode == "closed_book" || parsed.mode == "oracle_sents") {
        if (parts.size() != 1) return std::nullopt;
        return parsed;
    }
    if (parsed.mode == "oracle_passages" || parsed.mode == "oracle_bm25_standard" ||
        parsed.mode == "oracle_bm25_reverse") {
        if (parts.size() == 1) return parsed;
        if (parts.size() == 2 && take_k(parts[1])) return parsed;
        return std::nullopt;
    }
    return std::nullopt;
}

std::string label_to_filename(const std::string& label) {
    std::string name;
    name.reserve(label.size());
    for (char c : label) {
        bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
        name.push_back(safe ? c : '_');
    }
    return name;
}

} // namespace rageval
