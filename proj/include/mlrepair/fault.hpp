#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlrepair/testsuite.hpp"

namespace mlrepair {

// Pipeline-stage failures that abort a repair run (distinct from "no repair
// found", which is a normal outcome).
struct PipelineError : std::runtime_error {
    std::string code;
    explicit PipelineError(std::string code_, const std::string& detail = "")
        : std::runtime_error(detail.empty() ? code_ : code_ + ": " + detail),
          code(std::move(code_)) {}
};

struct CoverageMatrix {
    std::vector<TestResult> results;  // parallel to suite.tests
    std::vector<int> failing;         // test indices with verdict != Pass
    std::vector<int> passing;
    std::vector<int> n_cf;  // per global statement index
    std::vector<int> n_cs;
    int statement_count = 0;

    int n_f() const { return static_cast<int>(failing.size()); }
};

inline CoverageMatrix collect_coverage(const Program& p, const TestSuite& suite,
                                       int64_t step_limit) {
    CoverageMatrix m;
    m.statement_count = p.statement_count;
    m.n_cf.assign(static_cast<size_t>(p.statement_count), 0);
    m.n_cs.assign(static_cast<size_t>(p.statement_count), 0);
    m.results = run_suite(p, suite, step_limit);
    for (size_t t = 0; t < m.results.size(); ++t) {
        bool pass = m.results[t].verdict == Verdict::Pass;
        (pass ? m.passing : m.failing).push_back(static_cast<int>(t));
        std::vector<int>& tally = pass ? m.n_cs : m.n_cf;
        for (size_t s = 0; s < static_cast<size_t>(p.statement_count); ++s)
            if (m.results[t].covered.test(s)) ++tally[s];
    }
    if (m.failing.empty()) throw PipelineError("NoNegativeTest", "every test passes");
    return m;
}

struct SuspiciousStatement {
    StatementId id;
    int global_index = -1;
    int n_cf = 0;
    int n_cs = 0;
    double susp = 0.0;
};

inline double ochiai(int n_cf, int n_f, int n_cs) {
    if (n_cf == 0) return 0.0;
    return n_cf / std::sqrt(static_cast<double>(n_f) * (n_cf + n_cs));
}

inline std::vector<SuspiciousStatement> ochiai_suspiciousness(const CoverageMatrix& m,
                                                              const Program& p) {
    std::vector<SuspiciousStatement> out(static_cast<size_t>(p.statement_count));
    for_each_statement(p, [&](const Statement& s, const StmtContext&) {
        auto& row = out[static_cast<size_t>(s.global_index)];
        row.id = s.id;
        row.global_index = s.global_index;
        row.n_cf = m.n_cf[static_cast<size_t>(s.global_index)];
        row.n_cs = m.n_cs[static_cast<size_t>(s.global_index)];
        row.susp = ochiai(row.n_cf, m.n_f(), row.n_cs);
    });
    return out;
}

inline std::vector<SuspiciousStatement> select_candidates(std::vector<SuspiciousStatement> sl,
                                                          double gamma_min, int n_max) {
    std::erase_if(sl, [gamma_min](const SuspiciousStatement& s) { return s.susp < gamma_min; });
    std::stable_sort(sl.begin(), sl.end(),
                     [](const SuspiciousStatement& a, const SuspiciousStatement& b) {
                         if (a.susp != b.susp) return a.susp > b.susp;
                         return a.id < b.id;
                     });
    if (sl.empty()) throw PipelineError("EmptyCandidateSet", "no statement reaches the threshold");
    if (static_cast<int>(sl.size()) > n_max) sl.resize(static_cast<size_t>(n_max));
    return sl;
}

struct SeedFnRef {
    std::string display;  // as written: "f" or "mod.f"
    std::string module;   // resolved module
    std::string name;
    FuncSig sig;
};

struct SeedStatement {
    Statement stmt;  // copy; ids are the origin's
    StatementId origin;
    int module_index = -1;
    std::vector<ScopeVar> var_types;  // free variables with their origin types
    std::vector<SeedFnRef> fn_refs;   // free function references, resolved at origin
};

// Seed pool: statements covered by at least one test, deduplicated by
// structure, in program order. Origin-side name/type facts ride along for the
// type-matching screen.
inline std::vector<SeedStatement> collect_seed_statements(const CoverageMatrix& m,
                                                          const Program& p) {
    Bitset covered_any(static_cast<size_t>(p.statement_count));
    for (const auto& r : m.results)
        for (size_t s = 0; s < static_cast<size_t>(p.statement_count); ++s)
            if (r.covered.test(s)) covered_any.set(s);

    FuncTable table = FuncTable::build(p);
    std::vector<SeedStatement> seeds;
    std::vector<std::string> seen_keys;
    walk_with_scope(p, [&](const Statement& s, const StmtContext& ctx, const ScopeStack& scope) {
        if (!covered_any.test(static_cast<size_t>(s.global_index))) return;
        std::string key = stmt_text(s);
        for (const auto& k : seen_keys)
            if (k == key) return;
        seen_keys.push_back(key);

        SeedStatement seed;
        seed.stmt = s;
        seed.origin = s.id;
        seed.module_index = ctx.module_index;
        FreeNames free = collect_free_names(s);
        for (const auto& v : free.vars) {
            const ScopeVar* sv = scope.resolve(v);
            if (sv) seed.var_types.push_back(*sv);
        }
        const std::string& mod = p.modules[static_cast<size_t>(ctx.module_index)].name;
        for (const auto& [fmod, fname] : free.funcs) {
            SeedFnRef ref;
            ref.display = fmod.empty() ? fname : fmod + "." + fname;
            ref.module = fmod.empty() ? mod : fmod;
            ref.name = fname;
            if (const FuncInfo* fi = table.find(ref.module, ref.name)) ref.sig = fi->sig;
            seed.fn_refs.push_back(std::move(ref));
        }
        seeds.push_back(std::move(seed));
    });
    return seeds;
}

}  // namespace mlrepair
