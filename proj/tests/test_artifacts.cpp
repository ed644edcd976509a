#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "mlrepair/bundle.hpp"
#include "mlrepair/campaign.hpp"
#include "mlrepair/diff.hpp"

using namespace mlrepair;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    std::filesystem::path dir = std::filesystem::temp_directory_path() / "mlrepair_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST(Diff, IdenticalTextsProduceNothing) {
    EXPECT_EQ(unified_diff("a\nb\nc\n", "a\nb\nc\n", "x", "y"), "");
    EXPECT_EQ(unified_diff("", "", "x", "y"), "");
}

TEST(Diff, SingleLineReplacement) {
    std::string a = "one\ntwo\nthree\nfour\nfive\nsix\nseven\n";
    std::string b = "one\ntwo\nthree\nFOUR\nfive\nsix\nseven\n";
    std::string d = unified_diff(a, b, "a.ml", "b.ml");
    EXPECT_EQ(d,
              "--- a.ml\n"
              "+++ b.ml\n"
              "@@ -1,7 +1,7 @@\n"
              " one\n"
              " two\n"
              " three\n"
              "-four\n"
              "+FOUR\n"
              " five\n"
              " six\n"
              " seven\n");
}

TEST(Diff, InsertionIntoEmptyFile) {
    std::string d = unified_diff("", "hello\n", "a", "b");
    EXPECT_EQ(d,
              "--- a\n"
              "+++ b\n"
              "@@ -0,0 +1,1 @@\n"
              "+hello\n");
}

TEST(Diff, DeletionToEmptyFile) {
    std::string d = unified_diff("hello\n", "", "a", "b");
    EXPECT_EQ(d,
              "--- a\n"
              "+++ b\n"
              "@@ -1,1 +0,0 @@\n"
              "-hello\n");
}

TEST(Diff, DistantChangesSplitIntoTwoHunks) {
    std::string a, b;
    for (int i = 1; i <= 30; ++i) {
        a += "line" + std::to_string(i) + "\n";
        b += (i == 2 || i == 28 ? "changed" + std::to_string(i) : "line" + std::to_string(i)) + "\n";
    }
    std::string d = unified_diff(a, b, "a", "b");
    size_t first = d.find("@@");
    size_t second = d.find("@@", first + 2);
    size_t next = d.find("@@", second + 2);
    size_t third = d.find("@@", next + 2);
    ASSERT_NE(third, std::string::npos);
    EXPECT_EQ(d.find("@@", third + 2), std::string::npos);  // exactly two hunks
    EXPECT_NE(d.find("-line2\n"), std::string::npos);
    EXPECT_NE(d.find("+changed28\n"), std::string::npos);
}

TEST(Diff, NearbyChangesMergeIntoOneHunk) {
    std::string a, b;
    for (int i = 1; i <= 15; ++i) {
        a += "line" + std::to_string(i) + "\n";
        b += (i == 5 || i == 9 ? "changed" + std::to_string(i) : "line" + std::to_string(i)) + "\n";
    }
    std::string d = unified_diff(a, b, "a", "b");
    size_t first = d.find("@@");
    size_t second = d.find("@@", first + 2);
    size_t next = d.find("@@", second + 2);
    EXPECT_EQ(next, std::string::npos);  // one merged hunk
    EXPECT_NE(d.find("@@ -2,11 +2,11 @@\n"), std::string::npos);
}

TEST(Config, DefaultsMatchTheDocumentedTable) {
    SearchConfig cfg;
    EXPECT_EQ(cfg.population, 40);
    EXPECT_EQ(cfg.generations, 50);
    EXPECT_DOUBLE_EQ(cfg.gamma_min, 0.1);
    EXPECT_EQ(cfg.n_max, 40);
    EXPECT_DOUBLE_EQ(cfg.mu, 0.06);
    EXPECT_DOUBLE_EQ(cfg.weight, 0.5);
    EXPECT_DOUBLE_EQ(cfg.p_c, 1.0);
    EXPECT_DOUBLE_EQ(cfg.p_m, 0.0);
    EXPECT_EQ(cfg.n_e, 0);
    EXPECT_EQ(cfg.sample_size, 0);
    EXPECT_EQ(cfg.rng_seed, 1u);
    EXPECT_EQ(cfg.step_limit, 100000);
    EXPECT_EQ(cfg.mode, IngredientMode::File);
    EXPECT_EQ(cfg.variant, Variant::Arja);
}

TEST(Config, ParsesKeyValueText) {
    SearchConfig cfg;
    std::string err;
    bool ok = apply_config_text(cfg,
                                "# comment\n"
                                "population = 12\n"
                                "variant=arja_v\n"
                                "\n"
                                "gamma_min = 0.25\n"
                                "mode = package\n",
                                err);
    ASSERT_TRUE(ok) << err;
    EXPECT_EQ(cfg.population, 12);
    EXPECT_EQ(cfg.variant, Variant::ArjaV);
    EXPECT_DOUBLE_EQ(cfg.gamma_min, 0.25);
    EXPECT_EQ(cfg.mode, IngredientMode::Package);
}

TEST(Config, RejectsUnknownKeysWithLineNumbers) {
    SearchConfig cfg;
    std::string err;
    EXPECT_FALSE(apply_config_text(cfg, "population = 12\nbogus = 3\n", err));
    EXPECT_NE(err.find("line 2"), std::string::npos);
    EXPECT_NE(err.find("bogus"), std::string::npos);
}

TEST(Config, RejectsBadValues) {
    SearchConfig cfg;
    std::string err;
    EXPECT_FALSE(apply_config_entry(cfg, "population", "zero", err));
    EXPECT_FALSE(apply_config_entry(cfg, "variant", "nsga", err));
    EXPECT_FALSE(apply_config_entry(cfg, "gamma_min", "-1", err));
}

namespace {

const char* kSeedSrc = R"(module calc {
    public func scale_two(a: int) -> int {
        var r: int = a * 2
        return r
    }

    public func double_plus(a: int) -> int {
        var r: int = a * 2
        r = r + 1
        return r
    }

    public func tally(n: int) -> int {
        var total: int = 0
        var i: int = 0
        while i < n {
            total = total + i
            i = i + 1
        }
        return total
    }

    public func tally_sq(n: int) -> int {
        var acc: int = 0
        var j: int = 0
        while j < n {
            acc = acc + j * j
            j = j + 1
        }
        return acc
    }
}
)";

const char* kSeedSuite = R"(
test scale_zero: calc.scale_two(0) == 0
test scale_two: calc.scale_two(2) == 4
test scale_five: calc.scale_two(5) == 10
test dp_zero: calc.double_plus(0) == 1
test dp_three: calc.double_plus(3) == 7
test tally_zero: calc.tally(0) == 0
test tally_four: calc.tally(4) == 6
test tally_six: calc.tally(6) == 15
test tsq_zero: calc.tally_sq(0) == 0
test tsq_three: calc.tally_sq(3) == 5
test tsq_four: calc.tally_sq(4) == 14
)";

int count_statement_differences(const Program& a, const Program& b) {
    std::vector<std::pair<StatementId, std::string>> ta, tb;
    for_each_statement(a, [&](const Statement& s, const StmtContext&) {
        ta.emplace_back(s.id, stmt_text(s));
    });
    for_each_statement(b, [&](const Statement& s, const StmtContext&) {
        tb.emplace_back(s.id, stmt_text(s));
    });
    EXPECT_EQ(ta.size(), tb.size());
    int diff = 0;
    for (size_t i = 0; i < ta.size() && i < tb.size(); ++i) {
        EXPECT_EQ(ta[i].first, tb[i].first);
        if (ta[i].second != tb[i].second) ++diff;
    }
    return diff;
}

Program repair_with_truth(const SeededBug& bug) {
    std::vector<Edit> edits;
    for (const auto& f : bug.faults)
        edits.push_back({OpKind::Replace, f.target, -1, f.original_stmt});
    return apply_edits(bug.buggy, edits);
}

}  // namespace

TEST(Seeder, PlantsOneAdmissibleTwinBackedFault) {
    Program p = parse_program(kSeedSrc);
    TestSuite suite = parse_suite(kSeedSuite);
    SeederOptions opt;
    opt.k = 1;
    opt.bug_class = BugClass::F;
    opt.seed = 7;
    SeededBug bug = seed_bug(p, suite, opt);

    EXPECT_FALSE(validate_program(bug.buggy).has_value());
    EXPECT_EQ(count_statement_differences(p, bug.buggy), 1);
    ASSERT_EQ(bug.faults.size(), 1u);
    EXPECT_TRUE(bug.report.admissible());
    ASSERT_EQ(bug.truth.size(), 1u);
    EXPECT_EQ(bug.truth[0], "R " + bug.faults[0].target.str() + " " + bug.faults[0].original_text);
    EXPECT_NE(bug.faults[0].original_text, bug.faults[0].mutated_text);

    // the bug actually fails, and the recorded truth actually repairs it
    bool fails = false;
    for (const auto& r : run_suite(bug.buggy, suite, kDefaultStepLimit))
        if (r.verdict != Verdict::Pass) fails = true;
    EXPECT_TRUE(fails);
    for (const auto& r : run_suite(repair_with_truth(bug), suite, kDefaultStepLimit))
        EXPECT_EQ(r.verdict, Verdict::Pass);
}

TEST(Seeder, FaultForFClassKeepsAnIdenticalCoveredTwin) {
    Program p = parse_program(kSeedSrc);
    TestSuite suite = parse_suite(kSeedSuite);
    for (uint64_t seed : {1, 2, 3, 4, 5}) {
        SeederOptions opt;
        opt.k = 1;
        opt.bug_class = BugClass::F;
        opt.seed = seed;
        SeededBug bug = seed_bug(p, suite, opt);
        int twins = 0;
        for_each_statement(bug.buggy, [&](const Statement& s, const StmtContext&) {
            if (s.id != bug.faults[0].target && stmt_text(s) == bug.faults[0].original_text)
                ++twins;
        });
        EXPECT_GE(twins, 1) << "seed " << seed;
    }
}

TEST(Seeder, HClassFaultHasNoIdenticalTwinButARenamedOne) {
    Program p = parse_program(kSeedSrc);
    TestSuite suite = parse_suite(kSeedSuite);
    SeederOptions opt;
    opt.k = 1;
    opt.bug_class = BugClass::H;
    opt.seed = 11;
    SeededBug bug = seed_bug(p, suite, opt);

    int identical = 0, renamed = 0;
    for_each_statement(bug.buggy, [&](const Statement& s, const StmtContext&) {
        if (s.id == bug.faults[0].target) return;
        if (stmt_text(s) == bug.faults[0].original_text) ++identical;
        if (detail::renaming_twin(s, bug.faults[0].original_stmt)) ++renamed;
    });
    EXPECT_EQ(identical, 0);
    EXPECT_GE(renamed, 1);
    for (const auto& r : run_suite(repair_with_truth(bug), suite, kDefaultStepLimit))
        EXPECT_EQ(r.verdict, Verdict::Pass);
}

TEST(Seeder, TwoFaultBugsFailOnEveryProperSubset) {
    Program p = parse_program(kSeedSrc);
    TestSuite suite = parse_suite(kSeedSuite);
    SeederOptions opt;
    opt.k = 2;
    opt.bug_class = BugClass::F;
    opt.seed = 5;
    SeededBug bug = seed_bug(p, suite, opt);
    ASSERT_EQ(bug.faults.size(), 2u);
    EXPECT_EQ(count_statement_differences(p, bug.buggy), 2);

    // fixing only one fault must still leave a failing test
    for (size_t keep = 0; keep < 2; ++keep) {
        std::vector<Edit> edits{{OpKind::Replace, bug.faults[keep].target, -1,
                                 bug.faults[keep].original_stmt}};
        Program half = apply_edits(bug.buggy, edits);
        bool fails = false;
        for (const auto& r : run_suite(half, suite, kDefaultStepLimit))
            if (r.verdict != Verdict::Pass) fails = true;
        EXPECT_TRUE(fails) << "fault " << keep;
    }
    for (const auto& r : run_suite(repair_with_truth(bug), suite, kDefaultStepLimit))
        EXPECT_EQ(r.verdict, Verdict::Pass);
}

TEST(Seeder, RedundantStatementListing) {
    Program p = parse_program(kSeedSrc);
    std::vector<StatementId> red = find_redundant_statements(p);
    auto listed = [&](const char* mod, const char* fn, int ord) {
        for (const auto& id : red)
            if (id.module == mod && id.function == fn && id.ordinal == ord) return true;
        return false;
    };
    // 'var r: int = a * 2' appears in both scale_two and double_plus
    EXPECT_TRUE(listed("calc", "scale_two", 0));
    EXPECT_TRUE(listed("calc", "double_plus", 0));
    // 'r = r + 1' is unique to double_plus
    EXPECT_FALSE(listed("calc", "double_plus", 1));

    Program distinct = parse_program(
        "module solo {\n"
        "    public func f(a: int) -> int {\n"
        "        var r: int = a + 1\n"
        "        return r\n"
        "    }\n"
        "}\n");
    EXPECT_TRUE(find_redundant_statements(distinct).empty());
}

TEST(Seeder, FamilyWhitelistRestrictsMutations) {
    Program p = parse_program(kSeedSrc);
    TestSuite suite = parse_suite(kSeedSuite);
    for (uint64_t seed : {1, 2, 3, 4}) {
        SeederOptions opt;
        opt.k = 1;
        opt.bug_class = BugClass::F;
        opt.seed = seed;
        opt.families = {"arith_op"};
        SeededBug bug = seed_bug(p, suite, opt);
        EXPECT_EQ(bug.faults[0].family, "arith_op") << "seed " << seed;
    }
}

TEST(Seeder, SameSeedSameBug) {
    Program p = parse_program(kSeedSrc);
    TestSuite suite = parse_suite(kSeedSuite);
    SeederOptions opt;
    opt.k = 2;
    opt.bug_class = BugClass::F;
    opt.seed = 21;
    SeededBug a = seed_bug(p, suite, opt);
    SeededBug b = seed_bug(p, suite, opt);
    EXPECT_EQ(canonical_source(a.buggy), canonical_source(b.buggy));
    EXPECT_EQ(a.truth, b.truth);
    EXPECT_EQ(a.attempts, b.attempts);
}

TEST(Seeder, DeletionBaselineStaysBlindOnSeededBugs) {
    Program p = parse_program(kSeedSrc);
    TestSuite suite = parse_suite(kSeedSuite);
    for (uint64_t seed : {3, 9}) {
        SeederOptions opt;
        opt.k = 1;
        opt.bug_class = BugClass::F;
        opt.seed = seed;
        SeededBug bug = seed_bug(p, suite, opt);
        SearchConfig cfg;
        cfg.variant = Variant::Kali;
        RepairContext ctx = prepare_repair(bug.buggy, suite, cfg);
        EXPECT_TRUE(run_deletion_baseline(ctx).archive.empty()) << "seed " << seed;
    }
}

// Twin capped-value helpers: every statement has an identical twin, and the
// if-block nests a twin-backed assignment, so nested target picks are possible.
const char* kCapSrc = R"(module caps {
    public func cap_a(x: int) -> int {
        var c: int = x
        if c > 9 {
            c = 9
        }
        return c
    }

    public func cap_b(x: int) -> int {
        var c: int = x
        if c > 9 {
            c = 9
        }
        return c
    }
}
)";

const char* kCapSuite = R"(
test a_low: caps.cap_a(4) == 4
test a_edge: caps.cap_a(9) == 9
test a_high: caps.cap_a(12) == 9
test a_neg: caps.cap_a(-3) == -3
test b_low: caps.cap_b(4) == 4
test b_edge: caps.cap_b(9) == 9
test b_high: caps.cap_b(12) == 9
test b_neg: caps.cap_b(-3) == -3
)";

TEST(Seeder, EveryPlantedMutationSurvivesInTheSavedProgram) {
    Program p = parse_program(kCapSrc);
    TestSuite suite = parse_suite(kCapSuite);
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        SeederOptions opt;
        opt.k = 2;
        opt.bug_class = BugClass::F;
        opt.seed = seed;
        SeededBug bug = seed_bug(p, suite, opt);
        for (const auto& f : bug.faults) {
            auto found = find_statement(bug.buggy, f.target);
            ASSERT_TRUE(found.has_value()) << "seed " << seed;
            EXPECT_EQ(stmt_text(*found->stmt), f.mutated_text)
                << "seed " << seed << " target " << f.target.str();
        }
    }
}

TEST(Seeder, TargetFunctionWhitelistRestrictsTargets) {
    Program p = parse_program(kSeedSrc);
    TestSuite suite = parse_suite(kSeedSuite);
    for (uint64_t seed : {1, 2, 3, 4}) {
        SeederOptions opt;
        opt.k = 1;
        opt.bug_class = BugClass::F;
        opt.seed = seed;
        opt.target_functions = {"calc:scale_two", "calc:double_plus"};
        SeededBug bug = seed_bug(p, suite, opt);
        for (const auto& f : bug.faults) {
            std::string region = f.target.module + ":" + f.target.function;
            EXPECT_TRUE(region == "calc:scale_two" || region == "calc:double_plus")
                << "seed " << seed << " picked " << f.target.str();
        }
    }
}

TEST(Bundle, RoundTripsThroughDisk) {
    Program p = parse_program(kSeedSrc);
    TestSuite suite = parse_suite(kSeedSuite);
    SeederOptions opt;
    opt.k = 1;
    opt.bug_class = BugClass::F;
    opt.seed = 7;
    SeededBug bug = seed_bug(p, suite, opt);

    std::filesystem::path root = fresh_dir("bundle_roundtrip");
    write_file(root / "suite.mlt", kSeedSuite);
    save_bundle(root / "bug_a", bug, "bug_a", "../suite.mlt");

    BugBundle loaded = load_bundle(root / "bug_a");
    EXPECT_EQ(loaded.id, "bug_a");
    EXPECT_EQ(loaded.bug_class, BugClass::F);
    EXPECT_EQ(loaded.k, 1);
    EXPECT_EQ(loaded.seed, 7u);
    EXPECT_EQ(loaded.truth, bug.truth);
    EXPECT_TRUE(loaded.report.admissible());
    ASSERT_EQ(loaded.faults.size(), 1u);
    EXPECT_EQ(loaded.faults[0].target, bug.faults[0].target.str());
    EXPECT_EQ(canonical_source(loaded.program), canonical_source(bug.buggy));
    EXPECT_EQ(loaded.suite.tests.size(), suite.tests.size());
}

TEST(Campaign, TrialOnSeededBugFindsTheTwinFix) {
    Program p = parse_program(kSeedSrc);
    TestSuite suite = parse_suite(kSeedSuite);
    SeederOptions opt;
    opt.k = 1;
    opt.bug_class = BugClass::F;
    opt.seed = 7;
    SeededBug bug = seed_bug(p, suite, opt);

    SearchConfig cfg;
    cfg.population = 20;
    cfg.generations = 20;
    cfg.mu = 0.2;
    TrialOutcome out = run_trial(bug.buggy, suite, cfg, "bug_a", 1, 42);
    EXPECT_EQ(out.record.bug, "bug_a");
    EXPECT_EQ(out.record.variant, "arja");
    EXPECT_EQ(out.record.rng_seed, derive_seed(42, "bug_a", "arja", 1));
    EXPECT_EQ(out.record.evaluations, 400);
    ASSERT_TRUE(out.record.success);
    EXPECT_TRUE(out.record.evaluations_to_first.has_value());
    EXPECT_GE(out.record.smallest_patch, 1);
    EXPECT_GE(out.record.distinct_smallest, 1);
    EXPECT_EQ(out.record.archive_size, static_cast<int>(out.result.archive.size()));
    EXPECT_GE(out.record.cpu_seconds, 0.0);

    // same coordinates, same outcome
    TrialOutcome again = run_trial(bug.buggy, suite, cfg, "bug_a", 1, 42);
    EXPECT_EQ(again.record.evaluations_to_first, out.record.evaluations_to_first);
    EXPECT_EQ(again.record.archive_size, out.record.archive_size);
}

TEST(Campaign, TrialRecordsRoundTripThroughJsonl) {
    TrialRecord a;
    a.bug = "bug_a";
    a.variant = "arja_s";
    a.trial = 3;
    a.rng_seed = 99;
    a.success = true;
    a.evaluations = 2000;
    a.evaluations_to_first = 512;
    a.cpu_seconds = 1.25;
    a.archive_size = 4;
    a.smallest_patch = 1;
    a.distinct_smallest = 2;
    a.anomalies = {"note"};
    TrialRecord b;
    b.bug = "bug_b";
    b.variant = "kali";
    b.trial = 1;
    b.success = false;
    b.evaluations = 12;

    std::ostringstream out;
    write_trials(out, {a, b});
    std::istringstream in(out.str());
    std::vector<TrialRecord> back = read_trials(in);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].bug, "bug_a");
    EXPECT_EQ(back[0].evaluations_to_first, std::optional<int64_t>(512));
    EXPECT_EQ(back[0].anomalies, std::vector<std::string>{"note"});
    EXPECT_EQ(back[1].bug, "bug_b");
    EXPECT_FALSE(back[1].evaluations_to_first.has_value());
    EXPECT_FALSE(back[1].success);
}

TEST(Campaign, AggregationAveragesOnlySuccessfulTrials) {
    std::vector<TrialRecord> trials;
    for (int t = 1; t <= 3; ++t) {
        TrialRecord r;
        r.bug = "bug_a";
        r.variant = "arja";
        r.trial = t;
        r.success = t != 2;
        r.evaluations = 100;
        if (r.success) {
            r.evaluations_to_first = 10 * t;
            r.cpu_seconds = 1.0 * t;
            r.smallest_patch = t;
            r.archive_size = 5 * t;
            r.distinct_smallest = 2 * t;
        }
        trials.push_back(r);
    }
    TrialRecord none;
    none.bug = "bug_b";
    none.variant = "arja";
    none.trial = 1;
    none.success = false;
    trials.push_back(none);

    std::vector<MetricsRow> rows = aggregate_trials(trials);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].bug, "bug_a");
    EXPECT_EQ(rows[0].trials, 3);
    EXPECT_EQ(rows[0].successes, 2);
    EXPECT_DOUBLE_EQ(rows[0].mean_evals_to_first, 20.0);
    EXPECT_DOUBLE_EQ(rows[0].mean_cpu_seconds, 2.0);
    EXPECT_DOUBLE_EQ(rows[0].mean_smallest_patch, 2.0);
    EXPECT_DOUBLE_EQ(rows[0].mean_distinct_smallest, 4.0);
    EXPECT_EQ(rows[1].successes, 0);

    std::string tsv = metrics_tsv(rows);
    EXPECT_NE(tsv.find("bug\tvariant\ttrials\tsuccesses"), std::string::npos);
    EXPECT_NE(tsv.find("bug_a\tarja\t3\t2\t20.0\t2.000\t2.00\t4.00\n"), std::string::npos);
    EXPECT_NE(tsv.find("bug_b\tarja\t1\t0\t-\t-\t-\t-\n"), std::string::npos);
}
