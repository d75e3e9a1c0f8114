#include "rageval/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "rageval/conditions.hpp"
#include "rageval/errors.hpp"
#include "rageval/jsonl.hpp"

namespace rageval {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::vector<std::pair<std::string, std::string>> default_pairs() {
    return {{"reverse", "standard"}, {"reverse", "random"}, {"standard", "random"}};
}

ScoreTable merge_tables(const std::vector<RunDirInfo>& runs) {
    ScoreTable merged;
    for (const auto& run : runs)
        for (const auto& r : run.table.records()) merged.add(r);
    return merged;
}

} // namespace

RunDirInfo load_run_dir(const std::filesystem::path& dir) {
    RunDirInfo info;
    info.dir = dir;
    std::filesystem::path manifest_path = dir / "manifest.json";
    if (!std::filesystem::exists(manifest_path))
        throw validation_error("no manifest.json under " + dir.string());
    json manifest = json::parse(read_text(manifest_path), nullptr, false);
    if (manifest.is_discarded())
        throw parse_error("malformed manifest: " + manifest_path.string());
    info.model = manifest.value("model", "");
    info.dataset = manifest.value("dataset", "");
    info.retriever = manifest.value("retriever", "");
    info.table = ScoreTable::from_run_dir(dir);
    return info;
}

std::vector<int> observed_k_grid(const ScoreTable& table) {
    std::set<int> ks;
    for (const auto& label : table.conditions()) {
        auto parsed = parse_label(label);
        if (parsed && parsed->mode == "retrieved") ks.insert(parsed->k);
    }
    return {ks.begin(), ks.end()};
}

std::string curves_csv(const ScoreTable& table) {
    auto means = aggregate(table.records());
    // (strategy, k) -> mean, sorted by the map key
    std::map<std::pair<std::string, int>, const ConditionMean*> rows;
    for (const auto& m : means) {
        auto parsed = parse_label(m.condition_label);
        if (parsed && parsed->mode == "retrieved") rows[{parsed->ordering, parsed->k}] = &m;
    }
    std::string csv = "strategy,k,mean_f1,mean_accuracy,n\n";
    for (const auto& [key, m] : rows)
        csv += key.first + "," + std::to_string(key.second) + "," + fmt(m->f1) + "," +
               fmt(m->accuracy) + "," + std::to_string(m->count) + "\n";
    return csv;
}

std::string delta_csv(const ScoreTable& table,
                      const std::vector<std::pair<std::string, std::string>>& pairs,
                      const std::vector<int>& k_grid) {
    std::string csv = "pair,k,mean_delta,std,min,max,n_subsets\n";
    for (const auto& [a, b] : pairs) {
        DeltaCurve curve = delta_curve(table, a, b, k_grid);
        for (const auto& p : curve.points)
            csv += a + "-" + b + "," + std::to_string(p.k) + "," + fmt(p.mean_delta) + "," +
                   fmt(p.std_dev) + "," + fmt(p.min_delta) + "," + fmt(p.max_delta) + "," +
                   std::to_string(p.n_subsets) + "\n";
    }
    return csv;
}

std::string sweep_csv(const ScoreTable& table) {
    auto means = aggregate(table.records());
    std::map<std::pair<int, int>, const ConditionMean*> rows; // (k, position)
    for (const auto& m : means) {
        auto parsed = parse_label(m.condition_label);
        if (parsed && parsed->mode == "sweep") rows[{parsed->k, parsed->position}] = &m;
    }
    std::string csv = "position,k,mean_accuracy,mean_f1,n\n";
    for (const auto& [key, m] : rows)
        csv += std::to_string(key.second) + "," + std::to_string(key.first) + "," +
               fmt(m->accuracy) + "," + fmt(m->f1) + "," + std::to_string(m->count) + "\n";
    return csv;
}

std::string model_compare_csv(const std::vector<RunDirInfo>& runs,
                              const std::vector<int>& k_grid) {
    std::string csv = "model,k,delta_reverse_standard,best_f1,best_condition\n";
    std::vector<const RunDirInfo*> sorted;
    for (const auto& run : runs) sorted.push_back(&run);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const RunDirInfo* a, const RunDirInfo* b) { return a->model < b->model; });
    for (const RunDirInfo* run : sorted) {
        auto means = aggregate(run->table.records());
        double best_f1 = 0.0;
        std::string best_condition;
        for (const auto& m : means) {
            if (best_condition.empty() || m.f1 > best_f1) {
                best_f1 = m.f1;
                best_condition = m.condition_label;
            }
        }
        DeltaCurve curve = delta_curve(run->table, "reverse", "standard", k_grid);
        for (const auto& p : curve.points)
            csv += run->model + "," + std::to_string(p.k) + "," + fmt(p.mean_delta) + "," +
                   fmt(best_f1) + "," + best_condition + "\n";
    }
    return csv;
}

std::filesystem::path write_report(const std::vector<std::filesystem::path>& run_dirs,
                                   const std::string& mode, const std::filesystem::path& out,
                                   const std::vector<int>& k_grid) {
    if (run_dirs.empty()) throw validation_error("no run directories given");
    std::vector<RunDirInfo> runs;
    for (const auto& dir : run_dirs) runs.push_back(load_run_dir(dir));
    for (size_t i = 1; i < runs.size(); ++i)
        if (runs[i].dataset != runs[0].dataset)
            throw validation_error("mixing runs over different datasets: \"" + runs[0].dataset +
                                   "\" vs \"" + runs[i].dataset + "\"");

    std::string csv;
    if (mode == "curves") {
        csv = curves_csv(merge_tables(runs));
    } else if (mode == "delta") {
        ScoreTable merged = merge_tables(runs);
        auto grid = k_grid.empty() ? observed_k_grid(merged) : k_grid;
        if (grid.empty()) throw coverage_error("no retrieved conditions to difference");
        csv = delta_csv(merged, default_pairs(), grid);
    } else if (mode == "sweep") {
        csv = sweep_csv(merge_tables(runs));
    } else if (mode == "model_compare") {
        std::vector<int> grid = k_grid;
        if (grid.empty()) {
            std::set<int> common;
            for (size_t i = 0; i < runs.size(); ++i) {
                auto observed = observed_k_grid(runs[i].table);
                std::set<int> here(observed.begin(), observed.end());
                if (i == 0) {
                    common = here;
                } else {
                    std::set<int> kept;
                    for (int k : common)
                        if (here.count(k)) kept.insert(k);
                    common = kept;
                }
            }
            grid.assign(common.begin(), common.end());
        }
        if (grid.empty()) throw coverage_error("no shared retrieved k across runs");
        csv = model_compare_csv(runs, grid);
    } else {
        throw config_error("unknown report mode \"" + mode +
                           "\" (curves, delta, sweep, model_compare)");
    }
    std::filesystem::create_directories(out);
    std::filesystem::path path = out / (mode + ".csv");
    write_text_atomic(path, csv);
    return path;
}

} // namespace rageval
