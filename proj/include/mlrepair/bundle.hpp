#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlrepair/parser.hpp"
#include "mlrepair/seeder.hpp"

namespace mlrepair {

// A bug bundle is a directory: bug.json plus the buggy source. The test
// suite is shared between bundles, so bug.json points at it with a path
// relative to the bundle directory.
struct BundleFault {
    std::string target;
    std::string family;
    std::string original;
    std::string mutated;
};

struct BugBundle {
    std::string id;
    BugClass bug_class = BugClass::F;
    int k = 0;
    uint64_t seed = 0;
    int failing_tests = 0;
    std::string program_file;
    std::string suite_file;
    std::vector<std::string> truth;
    std::vector<BundleFault> faults;
    AdmissibilityReport report;
    Program program;
    TestSuite suite;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

inline void save_bundle(const std::filesystem::path& dir, const SeededBug& bug,
                        const std::string& id, const std::string& suite_rel) {
    std::filesystem::create_directories(dir);
    write_file(dir / "buggy.ml", canonical_source(bug.buggy));

    nlohmann::json j;
    j["id"] = id;
    j["class"] = bug_class_name(bug.bug_class);
    j["k"] = bug.k;
    j["seed"] = bug.seed;
    j["failing_tests"] = bug.failing_tests;
    j["program"] = "buggy.ml";
    j["suite"] = suite_rel;
    j["truth"] = bug.truth;
    nlohmann::json adm;
    adm["targets_are_candidates"] = bug.report.targets_are_candidates;
    adm["all_subsets_fail"] = bug.report.all_subsets_fail;
    adm["deletion_baseline_blind"] = bug.report.deletion_baseline_blind;
    adm["notes"] = bug.report.notes;
    j["admissibility"] = adm;
    nlohmann::json faults = nlohmann::json::array();
    for (const auto& f : bug.faults) {
        nlohmann::json jf;
        jf["target"] = f.target.str();
        jf["family"] = f.family;
        jf["original"] = f.original_text;
        jf["mutated"] = f.mutated_text;
        faults.push_back(jf);
    }
    j["faults"] = faults;
    write_file(dir / "bug.json", j.dump(2) + "\n");
}

inline BugBundle load_bundle(const std::filesystem::path& dir) {
    nlohmann::json j = nlohmann::json::parse(read_file(dir / "bug.json"));
    BugBundle b;
    b.id = j.at("id").get<std::string>();
    auto cls = parse_bug_class(j.at("class").get<std::string>());
    if (!cls) throw std::runtime_error(dir.string() + ": unknown bug class");
    b.bug_class = *cls;
    b.k = j.at("k").get<int>();
    b.seed = j.at("seed").get<uint64_t>();
    b.failing_tests = j.value("failing_tests", 0);
    b.program_file = j.at("program").get<std::string>();
    b.suite_file = j.at("suite").get<std::string>();
    b.truth = j.at("truth").get<std::vector<std::string>>();
    if (j.contains("admissibility")) {
        const auto& adm = j["admissibility"];
        b.report.targets_are_candidates = adm.value("targets_are_candidates", false);
        b.report.all_subsets_fail = adm.value("all_subsets_fail", false);
        b.report.deletion_baseline_blind = adm.value("deletion_baseline_blind", false);
        if (adm.contains("notes")) b.report.notes = adm["notes"].get<std::vector<std::string>>();
    }
    if (j.contains("faults"))
        for (const auto& jf : j["faults"])
            b.faults.push_back({jf.at("target").get<std::string>(),
                                jf.at("family").get<std::string>(),
                                jf.at("original").get<std::string>(),
                                jf.at("mutated").get<std::string>()});
    b.program = parse_program(read_file(dir / b.program_file));
    b.suite = parse_suite(read_file(dir / b.suite_file));
    return b;
}

}  // namespace mlrepair
