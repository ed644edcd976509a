#pragma once

#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mlrepair/bundle.hpp"
#include "mlrepair/campaign.hpp"
#include "mlrepair/diff.hpp"

namespace mlrepair {
namespace cli_detail {

namespace fs = std::filesystem;

inline std::string trim(std::string s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
    return s;
}

struct CommonOpts {
    std::string config_file;
    std::vector<std::string> sets;
    std::string variant;
    std::optional<uint64_t> seed;
};

inline void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--config", c.config_file, "key=value settings file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--set", c.sets, "override one setting, e.g. --set population=100");
    cmd->add_option("--variant", c.variant,
                    "search variant: arja, arja_v, arja_m, arja_b, arja_s, arja_r, kali");
    cmd->add_option("--seed", c.seed, "random seed");
}

inline SearchConfig build_config(const CommonOpts& c) {
    SearchConfig cfg;
    std::string err;
    if (!c.config_file.empty() && !apply_config_text(cfg, read_file(c.config_file), err))
        throw std::runtime_error(c.config_file + ": " + err);
    for (const std::string& kv : c.sets) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("--set expects key=value, got '" + kv + "'");
        if (!apply_config_entry(cfg, trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)), err))
            throw std::runtime_error(err);
    }
    if (!c.variant.empty()) {
        auto v = parse_variant(c.variant);
        if (!v) throw std::runtime_error("unknown variant '" + c.variant + "'");
        cfg.variant = *v;
    }
    if (c.seed) cfg.rng_seed = *c.seed;
    return cfg;
}

inline nlohmann::json config_json(const SearchConfig& cfg) {
    nlohmann::json j;
    j["population"] = cfg.population;
    j["generations"] = cfg.generations;
    j["gamma_min"] = cfg.gamma_min;
    j["n_max"] = cfg.n_max;
    j["mu"] = cfg.mu;
    j["weight"] = cfg.weight;
    j["p_c"] = cfg.p_c;
    j["p_m"] = cfg.p_m;
    j["n_e"] = cfg.n_e;
    j["sample_size"] = cfg.sample_size;
    j["rng_seed"] = cfg.rng_seed;
    j["step_limit"] = cfg.step_limit;
    j["mode"] = mode_name(cfg.mode);
    j["variant"] = variant_name(cfg.variant);
    return j;
}

inline std::string localization_tsv(const RepairContext& ctx) {
    std::string out = "rank\tstatement\tn_cf\tn_cs\tsuspiciousness\tcandidate\n";
    int rank = 0;
    for (const auto& s : ctx.ranked) {
        bool cand = false;
        for (const auto& c : ctx.candidates) cand = cand || c.id == s.id;
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.6f", s.susp);
        out += std::to_string(++rank) + "\t" + s.id.str() + "\t" + std::to_string(s.n_cf) + "\t" +
               std::to_string(s.n_cs) + "\t" + buf + "\t" + (cand ? "1" : "0") + "\n";
    }
    return out;
}

inline std::string points_tsv(const RepairContext& ctx) {
    std::string out = "point\tstatement\tsuspiciousness\tops\tingredients\trewritten\n";
    for (const auto& pt : ctx.points) {
        std::string ops;
        for (OpKind op : pt.ops) ops += op_name(op);
        int rewritten = 0;
        for (const auto& ing : pt.ingredients)
            if (ing.rewritten()) ++rewritten;
        char buf[48];
        std::snprintf(buf, sizeof(buf), "%.6f", pt.susp);
        out += std::to_string(pt.index) + "\t" + pt.id.str() + "\t" + buf + "\t" + ops + "\t" +
               std::to_string(pt.ingredients.size()) + "\t" + std::to_string(rewritten) + "\n";
    }
    return out;
}

inline std::string gens_jsonl(const RepairResult& res) {
    std::string out;
    for (const auto& g : res.generations) {
        nlohmann::json j;
        j["generation"] = g.generation;
        if (g.best_f2)
            j["best_f2"] = *g.best_f2;
        else
            j["best_f2"] = nullptr;
        j["archive_size"] = g.archive_size;
        j["evaluations"] = g.evaluations;
        out += j.dump() + "\n";
    }
    return out;
}

struct RepairArgs {
    std::string bundle;
    std::string program;
    std::string suite;
    std::string outdir = "out";
    CommonOpts common;
};

inline int do_repair(const RepairArgs& a) {
    Program program;
    TestSuite suite;
    std::string bug_id;
    std::string source_label;
    if (!a.bundle.empty()) {
        BugBundle b = load_bundle(a.bundle);
        program = std::move(b.program);
        suite = std::move(b.suite);
        bug_id = b.id;
        source_label = b.program_file;
    } else {
        if (a.program.empty() || a.suite.empty())
            throw std::runtime_error("repair needs --bundle or both --program and --suite");
        program = parse_program(read_file(a.program));
        suite = parse_suite(read_file(a.suite));
        bug_id = fs::path(a.program).stem().string();
        source_label = fs::path(a.program).filename().string();
    }
    SearchConfig cfg = build_config(a.common);

    fs::create_directories(a.outdir);
    std::ofstream log(fs::path(a.outdir) / "run.log");
    log << "bug " << bug_id << " variant " << variant_name(cfg.variant) << " seed "
        << cfg.rng_seed << "\n";

    std::clock_t t0 = std::clock();
    RepairContext ctx = prepare_repair(program, suite, cfg);
    write_file(fs::path(a.outdir) / "localization.tsv", localization_tsv(ctx));
    write_file(fs::path(a.outdir) / "points.tsv", points_tsv(ctx));
    log << "tests " << suite.tests.size() << " negative " << ctx.partition.t_f.size()
        << " retained " << ctx.partition.t_c.size() << " dropped " << ctx.partition.dropped.size()
        << "\n";
    log << "candidates " << ctx.candidates.size() << " points " << ctx.points.size() << "\n";

    RepairResult res = run_search(ctx);
    double cpu = static_cast<double>(std::clock() - t0) / CLOCKS_PER_SEC;
    write_file(fs::path(a.outdir) / "gens.jsonl", gens_jsonl(res));

    std::string original = canonical_source(program);
    nlohmann::json archive = nlohmann::json::array();
    for (size_t i = 0; i < res.archive.size(); ++i) {
        const ArchiveEntry& entry = res.archive[i];
        std::string stem = "patch_" + std::to_string(i + 1);
        write_file(fs::path(a.outdir) / (stem + ".edits"), entry.script);
        std::string patched = canonical_source(apply_edits(program, entry.edits));
        write_file(fs::path(a.outdir) / (stem + ".diff"),
                   unified_diff(original, patched, "a/" + source_label, "b/" + source_label));
        nlohmann::json je;
        je["file"] = stem;
        je["size"] = static_cast<int>(entry.obj.f1);
        je["found_at_eval"] = entry.found_at_eval;
        nlohmann::json lines = nlohmann::json::array();
        for (const auto& e : entry.edits) lines.push_back(edit_text(e));
        je["edits"] = lines;
        archive.push_back(je);
        log << "patch " << stem << " size " << static_cast<int>(entry.obj.f1) << " at eval "
            << entry.found_at_eval << "\n";
    }

    nlohmann::json report;
    report["bug"] = bug_id;
    report["config"] = config_json(ctx.cfg);
    report["localization"] = {{"failing_tests", ctx.coverage.failing.size()},
                              {"ranked", ctx.ranked.size()},
                              {"candidates", ctx.candidates.size()}};
    report["tests"] = {{"total", suite.tests.size()},
                       {"negative", ctx.partition.t_f.size()},
                       {"retained_positive", ctx.partition.t_c.size()},
                       {"dropped", ctx.partition.dropped.size()}};
    report["points"] = ctx.points.size();
    report["search"] = {{"evaluations", res.evaluations},
                        {"evaluations_to_first", res.evaluations_to_first
                                                     ? nlohmann::json(*res.evaluations_to_first)
                                                     : nlohmann::json(nullptr)},
                        {"generations", res.generations.size()}};
    report["archive"] = archive;
    report["anomalies"] = res.anomalies;
    report["success"] = !res.archive.empty();
    write_file(fs::path(a.outdir) / "report.json", report.dump(2) + "\n");

    log << "evaluations " << res.evaluations << " cpu_seconds " << cpu << "\n";
    log << (res.archive.empty() ? "no patch found" : "repaired") << "\n";
    std::cout << (res.archive.empty() ? "no patch found"
                                      : "repaired: " + std::to_string(res.archive.size()) +
                                            " patch(es) in " + a.outdir)
              << "\n";
    return res.archive.empty() ? 1 : 0;
}

struct SeedArgs {
    std::string program;
    std::string suite;
    std::string outdir;
    std::string id;
    std::string suite_rel;
    std::string bug_class = "F";
    std::string families;
    std::string functions;
    int k = 1;
    uint64_t seed = 1;
    int max_attempts = 1000;
    CommonOpts common;
};

inline std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(csv);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline int do_seed(const SeedArgs& a) {
    Program program = parse_program(read_file(a.program));
    TestSuite suite = parse_suite(read_file(a.suite));
    SeederOptions opt;
    opt.k = a.k;
    auto cls = parse_bug_class(a.bug_class);
    if (!cls) throw std::runtime_error("unknown bug class '" + a.bug_class + "', use F or H");
    opt.bug_class = *cls;
    opt.seed = a.seed;
    opt.max_attempts = a.max_attempts;
    opt.families = split_csv(a.families);
    opt.target_functions = split_csv(a.functions);
    opt.analysis = build_config(a.common);

    SeededBug bug = seed_bug(program, suite, opt);

    std::string id = a.id.empty() ? fs::path(a.outdir).filename().string() : a.id;
    std::string rel = a.suite_rel;
    if (rel.empty())
        rel = fs::relative(fs::absolute(a.suite), fs::absolute(a.outdir)).generic_string();
    save_bundle(a.outdir, bug, id, rel);

    std::cout << "seeded " << id << " class " << bug_class_name(bug.bug_class) << " k " << bug.k
              << " after " << bug.attempts << " attempt(s)\n";
    for (const auto& f : bug.faults)
        std::cout << "  " << f.target.str() << " [" << f.family << "] '" << f.original_text
                  << "' -> '" << f.mutated_text << "'\n";
    return 0;
}

struct CampaignArgs {
    std::vector<std::string> bundles;
    std::string variants = "arja";
    int trials = 10;
    uint64_t seed = 1;
    std::string outdir = "campaign";
    CommonOpts common;
};

inline int do_campaign(const CampaignArgs& a) {
    std::vector<Variant> variants;
    std::string item;
    std::istringstream vs(a.variants);
    while (std::getline(vs, item, ',')) {
        auto v = parse_variant(trim(item));
        if (!v) throw std::runtime_error("unknown variant '" + item + "'");
        variants.push_back(*v);
    }
    if (variants.empty()) throw std::runtime_error("no variants given");
    if (a.bundles.empty()) throw std::runtime_error("no bundles given");

    std::vector<BugBundle> bundles;
    for (const auto& dir : a.bundles) bundles.push_back(load_bundle(dir));

    SearchConfig base = build_config(a.common);
    fs::create_directories(a.outdir);
    std::ofstream trials_out(fs::path(a.outdir) / "trials.jsonl");
    std::ofstream log(fs::path(a.outdir) / "run.log");

    std::vector<TrialRecord> all;
    for (const auto& bundle : bundles) {
        for (Variant v : variants) {
            SearchConfig cfg = base;
            cfg.variant = v;
            for (int t = 1; t <= a.trials; ++t) {
                TrialOutcome out =
                    run_trial(bundle.program, bundle.suite, cfg, bundle.id, t, a.seed);
                trials_out << trial_to_json(out.record).dump() << "\n" << std::flush;
                log << bundle.id << " " << variant_name(v) << " trial " << t << " "
                    << (out.record.success ? "ok" : "miss") << " evals "
                    << out.record.evaluations << " cpu " << out.record.cpu_seconds << "\n";
                all.push_back(std::move(out.record));
            }
        }
    }
    std::string tsv = metrics_tsv(aggregate_trials(all));
    write_file(fs::path(a.outdir) / "metrics.tsv", tsv);
    std::cout << tsv;
    return 0;
}

struct ReportArgs {
    std::string trials;
    std::string out;
};

inline int do_report(const ReportArgs& a) {
    std::ifstream in(a.trials);
    if (!in) throw std::runtime_error("cannot read " + a.trials);
    std::vector<TrialRecord> trials = read_trials(in);
    std::string tsv = metrics_tsv(aggregate_trials(trials));
    if (a.out.empty())
        std::cout << tsv;
    else
        write_file(a.out, tsv);
    return 0;
}

}  // namespace cli_detail

inline int run_cli(int argc, char** argv) {
    using namespace cli_detail;
    CLI::App app{"search-based program repair for MiniLang"};
    app.require_subcommand(1);

    RepairArgs ra;
    CLI::App* rep = app.add_subcommand("repair", "search for patches to one bug");
    rep->add_option("--bundle", ra.bundle, "bug bundle directory")->check(CLI::ExistingDirectory);
    rep->add_option("--program", ra.program, "buggy program file")->check(CLI::ExistingFile);
    rep->add_option("--suite", ra.suite, "test suite file")->check(CLI::ExistingFile);
    rep->add_option("--out", ra.outdir, "artifact directory (default: out)");
    add_common(rep, ra.common);

    SeedArgs sa;
    CLI::App* seed = app.add_subcommand("seed", "plant an admissible bug and save the bundle");
    seed->add_option("--program", sa.program, "correct program file")
        ->required()
        ->check(CLI::ExistingFile);
    seed->add_option("--suite", sa.suite, "test suite file")->required()->check(CLI::ExistingFile);
    seed->add_option("--out", sa.outdir, "bundle directory to create")->required();
    seed->add_option("--id", sa.id, "bundle id (default: directory name)");
    seed->add_option("--class", sa.bug_class, "bug class, F or H (default: F)");
    seed->add_option("--k", sa.k, "number of seeded faults, 1 to 3 (default: 1)");
    seed->add_option("--bug-seed", sa.seed, "seeder random seed (default: 1)");
    seed->add_option("--attempts", sa.max_attempts, "seeding attempt budget (default: 1000)");
    seed->add_option("--families", sa.families,
                     "comma-separated mutation families to draw from (default: all)");
    seed->add_option("--functions", sa.functions,
                     "comma-separated module:function regions to target (default: all)");
    seed->add_option("--suite-rel", sa.suite_rel,
                     "suite path stored in bug.json (default: computed relative path)");
    add_common(seed, sa.common);

    CampaignArgs ca;
    CLI::App* camp = app.add_subcommand("campaign", "run repeated trials over bug bundles");
    camp->add_option("--bundle", ca.bundles, "bug bundle directory (repeatable)")
        ->required()
        ->check(CLI::ExistingDirectory);
    camp->add_option("--variants", ca.variants, "comma-separated variant list (default: arja)");
    camp->add_option("--trials", ca.trials, "trials per bug and variant (default: 10)");
    camp->add_option("--campaign-seed", ca.seed, "campaign seed (default: 1)");
    camp->add_option("--out", ca.outdir, "output directory (default: campaign)");
    add_common(camp, ca.common);

    ReportArgs pa;
    CLI::App* rpt = app.add_subcommand("report", "recompute the metrics table from trials.jsonl");
    rpt->add_option("--trials", pa.trials, "trials.jsonl produced by campaign")
        ->required()
        ->check(CLI::ExistingFile);
    rpt->add_option("--out", pa.out, "metrics file to write (default: stdout)");

    try {
        app.parse(argc, argv);
        if (rep->parsed()) return do_repair(ra);
        if (seed->parsed()) return do_seed(sa);
        if (camp->parsed()) return do_campaign(ca);
        if (rpt->parsed()) return do_report(pa);
        return 2;
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace mlrepair
