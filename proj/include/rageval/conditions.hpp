#pragma once

#include <optional>
#include <string>

namespace rageval {

// Condition labels are the stable keys tying together composed contexts,
// run records, score tables and reports:
//   retrieved:k=25:reverse   sweep:k=10:i=4   oracle_bm25_reverse:k=50
//   closed_book              oracle_sents     oracle_passages:k=5

std::string retrieved_label(int k, const std::string& ordering);
std::string sweep_label(int k, int position);
std::string oracle_label(const std::string& mode, int k); // k <= 0 omits the :k= part

struct ParsedLabel {
    std::string mode;     // retrieved | sweep | closed_book | oracle_*
    int k = 0;            // 0 when absent
    int position = 0;     // sweeps only
    std::string ordering; // retrieved only
};

std::optional<ParsedLabel> parse_label(const std::string& label);

// Filesystem-safe name for per-condition record files.
std::string label_to_filename(const std::string& label);

} // namespace rageval
