#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mlrepair/fault.hpp"
#include "mlrepair/filtering.hpp"
#include "mlrepair/parser.hpp"
#include "mlrepair/validate.hpp"

using namespace mlrepair;

namespace {

Program parsed(const std::string& src) {
    Program p = parse_program(src);
    auto err = validate_program(p);
    EXPECT_FALSE(err.has_value()) << (err ? err->str() : "");
    return p;
}

// buggy() adds 1 on the even branch, so even-input expectations below fail
const char* kTallySrc = R"(module fx {
  public func buggy(n: int) -> int {
    var r: int = n * 2
    if n % 2 == 0 {
      r = r + 1
    }
    return r
  }
}
)";

const char* kTallySuite = R"(
test f1: fx.buggy(2) == 4
test f2: fx.buggy(4) == 8
test f3: fx.buggy(1) == 99
test f4: fx.buggy(3) == 99
test p1: fx.buggy(6) == 13
test p2: fx.buggy(8) == 17
test p3: fx.buggy(10) == 21
)";

const char* kSeedSrc = R"(module fx {
  public func inc(a: int) -> int {
    a = a + 1
    return a
  }
  public func twice(a: int) -> int {
    a = a + 1
    a = a + 1
    return a
  }
  public func cold(a: int) -> int {
    a = a + 9
    return a
  }
  public func broken(a: int) -> int {
    var r: int = helper(a)
    return r - 1
  }
  func helper(a: int) -> int {
    return a * 3
  }
}
)";

const char* kSeedSuite = R"(
test n1: fx.broken(2) == 6
test p_inc: fx.inc(1) == 2
test p_twice: fx.twice(1) == 3
test p_helper: fx.broken(4) == 11
)";

CoverageMatrix coverage_of(const Program& p, const std::string& suite_text) {
    TestSuite suite = parse_suite(suite_text);
    auto err = validate_suite(p, suite);
    EXPECT_FALSE(err.has_value()) << (err ? err->message : "");
    return collect_coverage(p, suite, kDefaultStepLimit);
}

int global_of(const Program& p, const char* fn, int ordinal) {
    auto f = find_statement(p, StatementId{"fx", fn, ordinal});
    EXPECT_TRUE(f.has_value());
    return f->stmt->global_index;
}

// synthetic matrix over a throwaway program with n assignments
struct SyntheticFixture {
    Program p;
    CoverageMatrix m;
};

SyntheticFixture synthetic(int statements, int tests, std::mt19937_64& eng) {
    SyntheticFixture fx;
    SourceModule mod;
    mod.name = "m";
    FunctionDef fn;
    fn.name = "f";
    fn.is_public = true;
    fn.return_type = ValueType::Void;
    fn.params.push_back(Param{"x", ValueType::Int});
    for (int i = 0; i < statements; ++i) {
        Statement s;
        s.kind = StmtKind::Assign;
        s.name = "x";
        s.exprs.push_back(Expr::int_lit(i));
        fn.body.push_back(std::move(s));
    }
    mod.functions.push_back(std::move(fn));
    fx.p.modules.push_back(std::move(mod));
    finalize(fx.p);

    fx.m.statement_count = statements;
    fx.m.n_cf.assign(static_cast<size_t>(statements), 0);
    fx.m.n_cs.assign(static_cast<size_t>(statements), 0);
    for (int t = 0; t < tests; ++t) {
        TestResult r;
        bool fail = t == 0 || eng() % 3 == 0;  // guarantee one negative test
        r.verdict = fail ? Verdict::Fail : Verdict::Pass;
        r.covered = Bitset(static_cast<size_t>(statements));
        for (int s = 0; s < statements; ++s)
            if (eng() % 2) r.covered.set(static_cast<size_t>(s));
        (fail ? fx.m.failing : fx.m.passing).push_back(t);
        auto& tally = fail ? fx.m.n_cf : fx.m.n_cs;
        for (int s = 0; s < statements; ++s)
            if (r.covered.test(static_cast<size_t>(s))) ++tally[static_cast<size_t>(s)];
        fx.m.results.push_back(std::move(r));
    }
    return fx;
}

TEST(Coverage, TalliesMatchHandCounts) {
    Program p = parsed(kTallySrc);
    CoverageMatrix m = coverage_of(p, kTallySuite);
    EXPECT_EQ(m.n_f(), 4);
    EXPECT_EQ(m.passing.size(), 3u);
    int even_branch = global_of(p, "buggy", 2);  // r = r + 1
    EXPECT_EQ(m.n_cf[static_cast<size_t>(even_branch)], 2);
    EXPECT_EQ(m.n_cs[static_cast<size_t>(even_branch)], 3);
    int decl = global_of(p, "buggy", 0);
    EXPECT_EQ(m.n_cf[static_cast<size_t>(decl)], 4);
    EXPECT_EQ(m.n_cs[static_cast<size_t>(decl)], 3);
}

TEST(Coverage, AllPassingSuiteAborts) {
    Program p = parsed(kTallySrc);
    TestSuite suite = parse_suite("test ok: fx.buggy(2) == 5\n");
    try {
        collect_coverage(p, suite, kDefaultStepLimit);
        FAIL() << "expected NoNegativeTest";
    } catch (const PipelineError& e) {
        EXPECT_EQ(e.code, "NoNegativeTest");
    }
}

TEST(Ochiai, HandValues) {
    EXPECT_NEAR(ochiai(2, 4, 3), 0.4472135954999579, 1e-12);
    EXPECT_DOUBLE_EQ(ochiai(3, 3, 0), 1.0);
    EXPECT_DOUBLE_EQ(ochiai(0, 5, 7), 0.0);
    EXPECT_DOUBLE_EQ(ochiai(0, 5, 0), 0.0);  // never covered: guarded 0/0

    Program p = parsed(kTallySrc);
    CoverageMatrix m = coverage_of(p, kTallySuite);
    auto ranked = ochiai_suspiciousness(m, p);
    int even_branch = global_of(p, "buggy", 2);
    bool checked = false;
    for (const auto& s : ranked)
        if (s.global_index == even_branch) {
            EXPECT_NEAR(s.susp, 2.0 / std::sqrt(20.0), 1e-12);
            EXPECT_NEAR(s.susp, 0.4472135954999579, 1e-12);
            checked = true;
        }
    EXPECT_TRUE(checked);
}

TEST(Ochiai, MatchesBruteForceOnRandomMatrices) {
    std::mt19937_64 eng(20260814);
    for (int trial = 0; trial < 300; ++trial) {
        int stmts = 1 + static_cast<int>(eng() % 30);
        int tests = 1 + static_cast<int>(eng() % 20);
        SyntheticFixture fx = synthetic(stmts, tests, eng);
        auto ranked = ochiai_suspiciousness(fx.m, fx.p);
        ASSERT_EQ(ranked.size(), static_cast<size_t>(stmts));
        for (const auto& s : ranked) {
            int cf = 0, cs = 0;
            for (size_t t = 0; t < fx.m.results.size(); ++t) {
                if (!fx.m.results[t].covered.test(static_cast<size_t>(s.global_index))) continue;
                if (fx.m.results[t].verdict == Verdict::Pass)
                    ++cs;
                else
                    ++cf;
            }
            double expect =
                cf == 0 ? 0.0 : cf / std::sqrt(static_cast<double>(fx.m.n_f()) * (cf + cs));
            EXPECT_NEAR(s.susp, expect, 1e-12);
            EXPECT_EQ(s.n_cf, cf);
            EXPECT_EQ(s.n_cs, cs);
        }
    }
}

std::vector<SuspiciousStatement> susp_list(std::vector<double> vals) {
    std::vector<SuspiciousStatement> out;
    for (size_t i = 0; i < vals.size(); ++i) {
        SuspiciousStatement s;
        s.id = StatementId{"m", "f", static_cast<int>(i)};
        s.global_index = static_cast<int>(i);
        s.susp = vals[i];
        out.push_back(std::move(s));
    }
    return out;
}

TEST(Candidates, ThresholdFilters) {
    auto picked = select_candidates(susp_list({0.9, 0.5, 0.05}), 0.1, 40);
    ASSERT_EQ(picked.size(), 2u);
    EXPECT_DOUBLE_EQ(picked[0].susp, 0.9);
    EXPECT_DOUBLE_EQ(picked[1].susp, 0.5);
}

TEST(Candidates, CapBindsAndTiesOrderById) {
    auto sixty = susp_list(std::vector<double>(60, 1.0));
    // feed them in reverse to prove the tie-break reorders
    std::reverse(sixty.begin(), sixty.end());
    auto picked = select_candidates(sixty, 0.1, 40);
    ASSERT_EQ(picked.size(), 40u);
    for (int i = 0; i < 40; ++i) EXPECT_EQ(picked[static_cast<size_t>(i)].id.ordinal, i);
}

TEST(Candidates, DescendingSuspBeforeIdTieBreak) {
    auto picked = select_candidates(susp_list({0.2, 0.8, 0.5, 0.8}), 0.1, 40);
    ASSERT_EQ(picked.size(), 4u);
    EXPECT_EQ(picked[0].id.ordinal, 1);  // susp .8, lower id first
    EXPECT_EQ(picked[1].id.ordinal, 3);
    EXPECT_EQ(picked[2].id.ordinal, 2);
    EXPECT_EQ(picked[3].id.ordinal, 0);
}

TEST(Candidates, EmptySetRaises) {
    try {
        select_candidates(susp_list({0.05, 0.0}), 0.1, 40);
        FAIL() << "expected EmptyCandidateSet";
    } catch (const PipelineError& e) {
        EXPECT_EQ(e.code, "EmptyCandidateSet");
    }
}

TEST(Seeds, CoveredDedupedInProgramOrder) {
    Program p = parsed(kSeedSrc);
    CoverageMatrix m = coverage_of(p, kSeedSuite);
    auto seeds = collect_seed_statements(m, p);
    std::vector<std::string> texts;
    for (const auto& s : seeds) texts.push_back(stmt_text(s.stmt));
    ASSERT_EQ(texts.size(), 5u);
    EXPECT_EQ(texts[0], "a = a + 1");
    EXPECT_EQ(texts[1], "return a");
    EXPECT_EQ(texts[2], "var r: int = helper(a)");
    EXPECT_EQ(texts[3], "return r - 1");
    EXPECT_EQ(texts[4], "return a * 3");
    // first occurrence wins: the duplicate "a = a + 1" keeps inc's id
    EXPECT_EQ(seeds[0].origin, (StatementId{"fx", "inc", 0}));
    // uncovered statements contribute nothing
    for (const auto& t : texts) EXPECT_NE(t, "a = a + 9");
}

TEST(Seeds, CarryOriginTypesAndFunctionRefs) {
    Program p = parsed(kSeedSrc);
    CoverageMatrix m = coverage_of(p, kSeedSuite);
    auto seeds = collect_seed_statements(m, p);
    const SeedStatement* decl = nullptr;
    const SeedStatement* ret = nullptr;
    for (const auto& s : seeds) {
        if (stmt_text(s.stmt) == "var r: int = helper(a)") decl = &s;
        if (stmt_text(s.stmt) == "return r - 1") ret = &s;
    }
    ASSERT_NE(decl, nullptr);
    ASSERT_NE(ret, nullptr);
    ASSERT_EQ(decl->fn_refs.size(), 1u);
    EXPECT_EQ(decl->fn_refs[0].display, "helper");
    EXPECT_EQ(decl->fn_refs[0].module, "fx");
    EXPECT_EQ(decl->fn_refs[0].sig.ret, ValueType::Int);
    ASSERT_EQ(decl->var_types.size(), 1u);
    EXPECT_EQ(decl->var_types[0].name, "a");
    EXPECT_EQ(decl->var_types[0].type, ValueType::Int);
    ASSERT_EQ(ret->var_types.size(), 1u);
    EXPECT_EQ(ret->var_types[0].name, "r");
    EXPECT_EQ(ret->var_types[0].type, ValueType::Int);
}

TEST(Filtering, DropsPositivesAvoidingAllCandidates) {
    Program p = parsed(kSeedSrc);
    CoverageMatrix m = coverage_of(p, kSeedSuite);
    auto ranked = ochiai_suspiciousness(m, p);
    auto candidates = select_candidates(ranked, 0.1, 40);
    ASSERT_EQ(candidates.size(), 3u);  // broken:0, broken:1, helper:0
    EXPECT_EQ(candidates[0].id, (StatementId{"fx", "broken", 0}));
    EXPECT_EQ(candidates[1].id, (StatementId{"fx", "broken", 1}));
    EXPECT_EQ(candidates[2].id, (StatementId{"fx", "helper", 0}));

    TestPartition part = filter_positive_tests(m, candidates);
    EXPECT_EQ(part.t_f, (std::vector<int>{0}));
    EXPECT_EQ(part.t_c, (std::vector<int>{3}));       // p_helper touches broken/helper
    EXPECT_EQ(part.dropped, (std::vector<int>{1, 2}));  // p_inc, p_twice never do
}

TEST(Filtering, NegativesAlwaysRetained) {
    Program p = parsed(kTallySrc);
    CoverageMatrix m = coverage_of(p, kTallySuite);
    auto candidates = select_candidates(ochiai_suspiciousness(m, p), 0.1, 40);
    TestPartition part = filter_positive_tests(m, candidates);
    EXPECT_EQ(part.t_f.size(), 4u);
    EXPECT_EQ(part.t_c.size() + part.dropped.size(), 3u);
    // every test here reaches the suspicious function, nothing is dropped
    EXPECT_TRUE(part.dropped.empty());
}

}  // namespace
