#pragma once

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlrepair/bundle.hpp"

namespace mlrepair {

struct TrialRecord {
    std::string bug;
    std::string variant;
    int trial = 0;  // 1-based
    uint64_t rng_seed = 0;
    bool success = false;
    int64_t evaluations = 0;
    std::optional<int64_t> evaluations_to_first;
    double cpu_seconds = 0.0;
    int archive_size = 0;
    int smallest_patch = 0;     // min edit count over the archive, 0 when empty
    int distinct_smallest = 0;  // archive entries tying that minimum
    std::vector<std::string> anomalies;
};

struct TrialOutcome {
    TrialRecord record;
    RepairResult result;
};

// One repair attempt with a trial-specific seed. Pipeline failures (nothing
// localizable, empty candidate set, ...) count as unsuccessful trials.
inline TrialOutcome run_trial(const Program& p, const TestSuite& suite, SearchConfig cfg,
                              const std::string& bug_id, int trial, uint64_t campaign_seed) {
    cfg.rng_seed = derive_seed(campaign_seed, bug_id, variant_name(cfg.variant), trial);
    TrialOutcome out;
    out.record.bug = bug_id;
    out.record.variant = variant_name(cfg.variant);
    out.record.trial = trial;
    out.record.rng_seed = cfg.rng_seed;
    std::clock_t t0 = std::clock();
    try {
        RepairContext ctx = prepare_repair(p, suite, cfg);
        out.result = run_search(ctx);
        out.record.evaluations = out.result.evaluations;
        out.record.evaluations_to_first = out.result.evaluations_to_first;
        out.record.archive_size = static_cast<int>(out.result.archive.size());
        out.record.success = !out.result.archive.empty();
        out.record.anomalies = out.result.anomalies;
        if (out.record.success) {
            int best = 0;
            for (const auto& e : out.result.archive) {
                int size = static_cast<int>(e.obj.f1);
                if (best == 0 || size < best) best = size;
            }
            int ties = 0;
            for (const auto& e : out.result.archive)
                if (static_cast<int>(e.obj.f1) == best) ++ties;
            out.record.smallest_patch = best;
            out.record.distinct_smallest = ties;
        }
    } catch (const PipelineError& e) {
        out.record.anomalies.push_back(std::string("pipeline: ") + e.what());
    }
    out.record.cpu_seconds = static_cast<double>(std::clock() - t0) / CLOCKS_PER_SEC;
    return out;
}

inline nlohmann::json trial_to_json(const TrialRecord& r) {
    nlohmann::json j;
    j["bug"] = r.bug;
    j["variant"] = r.variant;
    j["trial"] = r.trial;
    j["rng_seed"] = r.rng_seed;
    j["success"] = r.success;
    j["evaluations"] = r.evaluations;
    if (r.evaluations_to_first)
        j["evaluations_to_first"] = *r.evaluations_to_first;
    else
        j["evaluations_to_first"] = nullptr;
    j["cpu_seconds"] = r.cpu_seconds;
    j["archive_size"] = r.archive_size;
    j["smallest_patch"] = r.smallest_patch;
    j["distinct_smallest"] = r.distinct_smallest;
    j["anomalies"] = r.anomalies;
    return j;
}

inline TrialRecord trial_from_json(const nlohmann::json& j) {
    TrialRecord r;
    r.bug = j.at("bug").get<std::string>();
    r.variant = j.at("variant").get<std::string>();
    r.trial = j.at("trial").get<int>();
    r.rng_seed = j.at("rng_seed").get<uint64_t>();
    r.success = j.at("success").get<bool>();
    r.evaluations = j.at("evaluations").get<int64_t>();
    if (!j.at("evaluations_to_first").is_null())
        r.evaluations_to_first = j.at("evaluations_to_first").get<int64_t>();
    r.cpu_seconds = j.at("cpu_seconds").get<double>();
    r.archive_size = j.at("archive_size").get<int>();
    r.smallest_patch = j.at("smallest_patch").get<int>();
    r.distinct_smallest = j.at("distinct_smallest").get<int>();
    if (j.contains("anomalies")) r.anomalies = j["anomalies"].get<std::vector<std::string>>();
    return r;
}

inline void write_trials(std::ostream& out, const std::vector<TrialRecord>& trials) {
    for (const auto& r : trials) out << trial_to_json(r).dump() << "\n";
}

inline std::vector<TrialRecord> read_trials(std::istream& in) {
    std::vector<TrialRecord> trials;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        trials.push_back(trial_from_json(nlohmann::json::parse(line)));
    }
    return trials;
}

// Per (bug, variant) aggregation. The means cover successful trials only, so
// a row with zero successes renders them as "-".
struct MetricsRow {
    std::string bug;
    std::string variant;
    int trials = 0;
    int successes = 0;
    double mean_evals_to_first = 0.0;
    double mean_cpu_seconds = 0.0;
    double mean_smallest_patch = 0.0;
    double mean_distinct_smallest = 0.0;
};

inline std::vector<MetricsRow> aggregate_trials(const std::vector<TrialRecord>& trials) {
    std::map<std::pair<std::string, std::string>, MetricsRow> rows;
    for (const auto& t : trials) {
        MetricsRow& row = rows[{t.bug, t.variant}];
        row.bug = t.bug;
        row.variant = t.variant;
        ++row.trials;
        if (!t.success) continue;
        ++row.successes;
        if (t.evaluations_to_first)
            row.mean_evals_to_first += static_cast<double>(*t.evaluations_to_first);
        row.mean_cpu_seconds += t.cpu_seconds;
        row.mean_smallest_patch += t.smallest_patch;
        row.mean_distinct_smallest += t.distinct_smallest;
    }
    std::vector<MetricsRow> out;
    for (auto& [key, row] : rows) {
        if (row.successes > 0) {
            row.mean_evals_to_first /= row.successes;
            row.mean_cpu_seconds /= row.successes;
            row.mean_smallest_patch /= row.successes;
            row.mean_distinct_smallest /= row.successes;
        }
        out.push_back(row);
    }
    return out;
}

namespace detail {

inline std::string fixed(double v, int places) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", places, v);
    return buf;
}

}  // namespace detail

inline std::string metrics_tsv(const std::vector<MetricsRow>& rows) {
    std::string out =
        "bug\tvariant\ttrials\tsuccesses\tevals_to_first\tcpu_seconds\tpatch_size\tpatches\n";
    for (const auto& r : rows) {
        out += r.bug + "\t" + r.variant + "\t" + std::to_string(r.trials) + "\t" +
               std::to_string(r.successes) + "\t";
        if (r.successes > 0) {
            out += detail::fixed(r.mean_evals_to_first, 1) + "\t" +
                   detail::fixed(r.mean_cpu_seconds, 3) + "\t" +
                   detail::fixed(r.mean_smallest_patch, 2) + "\t" +
                   detail::fixed(r.mean_distinct_smallest, 2);
        } else {
            out += "-\t-\t-\t-";
        }
        out += "\n";
    }
    return out;
}

}  // namespace mlrepair
