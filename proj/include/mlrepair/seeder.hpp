#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mlrepair/printer.hpp"
#include "mlrepair/search.hpp"

namespace mlrepair {

// F: every seeded fault has an identical same-module twin, so the plain
// ingredient screen can restore it. H: at least the renamed shape of the
// original exists, so only the type-matching screens can.
enum class BugClass { F, H };

inline const char* bug_class_name(BugClass c) { return c == BugClass::F ? "F" : "H"; }

inline std::optional<BugClass> parse_bug_class(const std::string& s) {
    if (s == "F" || s == "f") return BugClass::F;
    if (s == "H" || s == "h") return BugClass::H;
    return std::nullopt;
}

struct SeededFault {
    StatementId target;
    std::string family;
    std::string original_text;
    std::string mutated_text;
    Statement original_stmt;
    Statement mutated_stmt;
};

struct AdmissibilityReport {
    bool targets_are_candidates = false;
    bool all_subsets_fail = false;
    bool deletion_baseline_blind = false;
    std::vector<std::string> notes;

    bool admissible() const {
        return targets_are_candidates && all_subsets_fail && deletion_baseline_blind;
    }
};

struct SeededBug {
    Program buggy;
    BugClass bug_class = BugClass::F;
    int k = 0;
    uint64_t seed = 0;
    int attempts = 0;
    int failing_tests = 0;
    std::vector<SeededFault> faults;
    std::vector<std::string> truth;  // repair edits that restore the original
    AdmissibilityReport report;
};

struct SeederOptions {
    int k = 1;
    BugClass bug_class = BugClass::F;
    uint64_t seed = 1;
    int max_attempts = 1000;
    std::vector<std::string> families;  // allowed mutation families, empty means all
    std::vector<std::string> target_functions;  // allowed "module:function" regions, empty means all
    SearchConfig analysis;  // localization and step-limit settings for the checks
};

// Statements with an identical-text sibling elsewhere in the same module.
inline std::vector<StatementId> find_redundant_statements(const Program& p) {
    struct Entry {
        StatementId id;
        int module_index;
        std::string text;
    };
    std::vector<Entry> all;
    for_each_statement(p, [&](const Statement& s, const StmtContext& c) {
        all.push_back({s.id, c.module_index, stmt_text(s)});
    });
    std::vector<StatementId> out;
    for (size_t i = 0; i < all.size(); ++i)
        for (size_t j = 0; j < all.size(); ++j)
            if (i != j && all[i].module_index == all[j].module_index &&
                all[i].text == all[j].text) {
                out.push_back(all[i].id);
                break;
            }
    return out;
}

namespace detail {

inline Statement* find_statement_mut_block(std::vector<Statement>& block, const StatementId& id) {
    for (auto& s : block) {
        if (s.id == id) return &s;
        if (Statement* r = find_statement_mut_block(s.body, id)) return r;
        if (Statement* r = find_statement_mut_block(s.else_body, id)) return r;
    }
    return nullptr;
}

inline Statement* find_statement_mut(Program& p, const StatementId& id) {
    for (auto& m : p.modules) {
        if (m.name != id.module) continue;
        for (auto& f : m.functions)
            if (f.name == id.function)
                if (Statement* r = find_statement_mut_block(f.body, id)) return r;
    }
    return nullptr;
}

struct ExprVariant {
    Expr expr;
    const char* family;
};

// Every single-spot tweak of an expression, drawn from the five fault
// families. Type legality is rechecked downstream; anything the validator
// rejects just costs one seeding attempt.
inline void expr_variants(const Expr& e, const Scope& scope, std::vector<ExprVariant>& out) {
    switch (e.kind) {
        case ExprKind::IntLit:
            out.push_back({Expr::int_lit(e.int_val + 1), "constant"});
            out.push_back({Expr::int_lit(e.int_val - 1), "constant"});
            if (e.int_val != 0) out.push_back({Expr::int_lit(-e.int_val), "constant"});
            break;
        case ExprKind::FloatLit:
            out.push_back({Expr::float_lit(e.float_val + 1.0), "constant"});
            out.push_back({Expr::float_lit(e.float_val - 1.0), "constant"});
            if (e.float_val != 0.0) out.push_back({Expr::float_lit(-e.float_val), "constant"});
            break;
        case ExprKind::BoolLit:
            out.push_back({Expr::bool_lit(!e.bool_val), "negation"});
            break;
        case ExprKind::VarRef: {
            const ScopeVar* self = scope.find_var(e.name);
            if (!self) break;
            std::set<std::string> offered;
            for (size_t i = scope.vars.size(); i-- > 0;) {
                const ScopeVar& v = scope.vars[i];
                if (v.name == e.name || v.type != self->type) continue;
                if (!offered.insert(v.name).second) continue;
                out.push_back({Expr::var(v.name), "var_subst"});
            }
            if (self->type == ValueType::Bool)
                out.push_back({Expr::unary(UnaryOp::Not, e), "negation"});
            break;
        }
        case ExprKind::Unary: {
            if (e.uop == UnaryOp::Not) out.push_back({e.args[0], "negation"});
            std::vector<ExprVariant> sub;
            expr_variants(e.args[0], scope, sub);
            for (auto& sv : sub) {
                Expr copy = e;
                copy.args[0] = std::move(sv.expr);
                out.push_back({std::move(copy), sv.family});
            }
            break;
        }
        case ExprKind::Binary: {
            if (is_arith(e.bop)) {
                for (BinaryOp o : {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div,
                                   BinaryOp::Mod})
                    if (o != e.bop) {
                        Expr c = e;
                        c.bop = o;
                        out.push_back({std::move(c), "arith_op"});
                    }
            } else if (e.bop == BinaryOp::Eq || e.bop == BinaryOp::Ne) {
                Expr c = e;
                c.bop = e.bop == BinaryOp::Eq ? BinaryOp::Ne : BinaryOp::Eq;
                out.push_back({std::move(c), "rel_op"});
            } else if (is_comparison(e.bop)) {
                for (BinaryOp o :
                     {BinaryOp::Lt, BinaryOp::Le, BinaryOp::Gt, BinaryOp::Ge})
                    if (o != e.bop) {
                        Expr c = e;
                        c.bop = o;
                        out.push_back({std::move(c), "rel_op"});
                    }
            }
            if (is_comparison(e.bop) || e.bop == BinaryOp::And || e.bop == BinaryOp::Or)
                out.push_back({Expr::unary(UnaryOp::Not, e), "negation"});
            for (int side = 0; side < 2; ++side) {
                std::vector<ExprVariant> sub;
                expr_variants(e.args[static_cast<size_t>(side)], scope, sub);
                for (auto& sv : sub) {
                    Expr copy = e;
                    copy.args[static_cast<size_t>(side)] = std::move(sv.expr);
                    out.push_back({std::move(copy), sv.family});
                }
            }
            break;
        }
        case ExprKind::Call:
            for (size_t ai = 0; ai < e.args.size(); ++ai) {
                std::vector<ExprVariant> sub;
                expr_variants(e.args[ai], scope, sub);
                for (auto& sv : sub) {
                    Expr copy = e;
                    copy.args[ai] = std::move(sv.expr);
                    out.push_back({std::move(copy), sv.family});
                }
            }
            break;
    }
}

struct MutationVariant {
    Statement stmt;
    const char* family;
};

inline std::vector<MutationVariant> statement_variants(const Statement& s, const Scope& scope,
                                                       const std::vector<std::string>& families) {
    auto allowed = [&](const char* family) {
        if (families.empty()) return true;
        for (const auto& f : families)
            if (f == family) return true;
        return false;
    };
    std::vector<MutationVariant> out;
    if (s.has_expr()) {
        std::vector<ExprVariant> ev;
        expr_variants(s.expr(), scope, ev);
        for (auto& v : ev) {
            if (!allowed(v.family)) continue;
            Statement copy = s;
            copy.exprs[0] = std::move(v.expr);
            out.push_back({std::move(copy), v.family});
        }
    }
    if (s.kind == StmtKind::Assign && allowed("var_subst")) {
        if (const ScopeVar* lhs = scope.find_var(s.name)) {
            std::set<std::string> offered;
            for (size_t i = scope.vars.size(); i-- > 0;) {
                const ScopeVar& v = scope.vars[i];
                if (v.name == s.name || v.type != lhs->type) continue;
                if (!offered.insert(v.name).second) continue;
                Statement copy = s;
                copy.name = v.name;
                out.push_back({std::move(copy), "var_subst"});
            }
        }
    }
    return out;
}

inline bool shape_map_expr(const Expr& a, const Expr& b, std::map<std::string, std::string>& fwd,
                           std::map<std::string, std::string>& rev) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case ExprKind::IntLit: return a.int_val == b.int_val;
        case ExprKind::FloatLit: return a.float_val == b.float_val;
        case ExprKind::BoolLit: return a.bool_val == b.bool_val;
        case ExprKind::StrLit: return a.str_val == b.str_val;
        case ExprKind::VarRef: {
            auto f = fwd.find(a.name);
            if (f != fwd.end()) return f->second == b.name;
            if (rev.count(b.name)) return false;
            fwd.emplace(a.name, b.name);
            rev.emplace(b.name, a.name);
            return true;
        }
        case ExprKind::Unary:
            return a.uop == b.uop && shape_map_expr(a.args[0], b.args[0], fwd, rev);
        case ExprKind::Binary:
            return a.bop == b.bop && shape_map_expr(a.args[0], b.args[0], fwd, rev) &&
                   shape_map_expr(a.args[1], b.args[1], fwd, rev);
        case ExprKind::Call: {
            if (a.name != b.name || a.target_module != b.target_module ||
                a.args.size() != b.args.size())
                return false;
            for (size_t i = 0; i < a.args.size(); ++i)
                if (!shape_map_expr(a.args[i], b.args[i], fwd, rev)) return false;
            return true;
        }
    }
    return false;
}

// True when `ingredient` becomes `target` under a consistent one-to-one
// variable renaming that changes at least one name. Declared names must
// already agree, since the screens never rename a declaration.
inline bool renaming_twin(const Statement& ingredient, const Statement& target) {
    if (ingredient.kind != target.kind) return false;
    if (ingredient.kind == StmtKind::If || ingredient.kind == StmtKind::While) return false;
    std::map<std::string, std::string> fwd, rev;
    if (ingredient.kind == StmtKind::VarDecl) {
        if (ingredient.name != target.name || ingredient.decl_type != target.decl_type)
            return false;
    } else if (ingredient.kind == StmtKind::Assign) {
        fwd.emplace(ingredient.name, target.name);
        rev.emplace(target.name, ingredient.name);
    }
    if (ingredient.has_expr() != target.has_expr()) return false;
    if (ingredient.has_expr() && !shape_map_expr(ingredient.expr(), target.expr(), fwd, rev))
        return false;
    for (const auto& [from, to] : fwd)
        if (from != to) return true;
    return false;
}

}  // namespace detail

// Plants k mutations that form one admissible bug: localizable targets, no
// free rides from partial fixes, and nothing the deletion baseline can paper
// over. Retries with fresh random choices until the checks pass.
inline SeededBug seed_bug(const Program& p, const TestSuite& suite, const SeederOptions& opt) {
    if (opt.k < 1 || opt.k > 3) throw PipelineError("ExhaustedAttempts", "k must be 1, 2, or 3");
    if (auto err = validate_program(p)) throw PipelineError("InvalidProgram", err->str());
    if (auto err = validate_suite(p, suite)) throw PipelineError("InvalidSuite", err->str());

    std::vector<TestResult> base = run_suite(p, suite, opt.analysis.step_limit);
    for (size_t i = 0; i < base.size(); ++i)
        if (base[i].verdict != Verdict::Pass)
            throw PipelineError("SeedBaselineFails",
                                "test '" + suite.tests[i].name + "' fails on the input program");

    Bitset covered(static_cast<size_t>(p.statement_count));
    for (const auto& r : base)
        for (size_t s = 0; s < static_cast<size_t>(p.statement_count); ++s)
            if (r.covered.test(s)) covered.set(s);

    FuncTable table = FuncTable::build(p);

    struct Site {
        const Statement* stmt;
        StmtContext ctx;
        std::string text;
    };
    std::vector<Site> sites;
    for_each_statement(p, [&](const Statement& s, const StmtContext& c) {
        if (covered.test(static_cast<size_t>(s.global_index)))
            sites.push_back({&s, c, stmt_text(s)});
    });

    std::vector<Scope> scopes;
    scopes.reserve(sites.size());
    for (const Site& site : sites) scopes.push_back(determine_scope(p, table, site.stmt->id));

    // class eligibility, checked against the pristine run
    std::vector<size_t> eligible;
    for (size_t i = 0; i < sites.size(); ++i) {
        const Statement& s = *sites[i].stmt;
        if (!opt.target_functions.empty()) {
            std::string region = s.id.module + ":" + s.id.function;
            bool listed = false;
            for (const auto& r : opt.target_functions)
                if (r == region) listed = true;
            if (!listed) continue;
        }
        if (opt.bug_class == BugClass::H &&
            (s.kind == StmtKind::If || s.kind == StmtKind::While))
            continue;
        // a Return can only be restored where the ingredient rules admit one
        if (s.kind == StmtKind::Return && !sites[i].ctx.last_of_block) continue;
        if (detail::statement_variants(s, scopes[i], opt.families).empty()) continue;
        bool twin = false, shape = false;
        for (size_t j = 0; j < sites.size(); ++j) {
            if (j == i || sites[j].ctx.module_index != sites[i].ctx.module_index) continue;
            if (sites[j].text == sites[i].text)
                twin = true;
            else if (detail::renaming_twin(*sites[j].stmt, s))
                shape = true;
        }
        bool fits = opt.bug_class == BugClass::F ? twin : (!twin && shape);
        if (fits) eligible.push_back(i);
    }
    if (static_cast<int>(eligible.size()) < opt.k)
        throw PipelineError("ExhaustedAttempts",
                            "not enough eligible target statements for class " +
                                std::string(bug_class_name(opt.bug_class)));

    // Mutating a block statement rewrites its whole subtree, which would
    // silently erase a second mutation planted inside it.
    auto contains = [](const Statement& outer, const StatementId& id) {
        bool hit = false;
        auto walk = [&](const std::vector<Statement>& block, auto&& self) -> void {
            for (const auto& s : block) {
                if (s.id == id) hit = true;
                self(s.body, self);
                self(s.else_body, self);
            }
        };
        walk(outer.body, walk);
        walk(outer.else_body, walk);
        return hit;
    };

    Rng rng(opt.seed);
    for (int attempt = 1; attempt <= opt.max_attempts; ++attempt) {
        std::vector<size_t> pool = eligible;
        rng.shuffle(pool);
        pool.resize(static_cast<size_t>(opt.k));

        bool nested = false;
        for (size_t a : pool)
            for (size_t b : pool)
                if (a != b && contains(*sites[a].stmt, sites[b].stmt->id)) nested = true;
        if (nested) continue;

        Program buggy = p;
        std::vector<SeededFault> faults;
        bool built = true;
        for (size_t idx : pool) {
            const Statement& orig = *sites[idx].stmt;
            std::vector<detail::MutationVariant> variants =
                detail::statement_variants(orig, scopes[idx], opt.families);
            const detail::MutationVariant& chosen = variants[rng.uniform_index(variants.size())];
            Statement* slot = detail::find_statement_mut(buggy, orig.id);
            if (!slot) {
                built = false;
                break;
            }
            *slot = chosen.stmt;
            faults.push_back({orig.id, chosen.family, stmt_text(orig), stmt_text(chosen.stmt),
                              orig, chosen.stmt});
        }
        if (!built || validate_program(buggy)) continue;

        CoverageMatrix cov;
        std::vector<SuspiciousStatement> cand;
        try {
            cov = collect_coverage(buggy, suite, opt.analysis.step_limit);
            cand = select_candidates(ochiai_suspiciousness(cov, buggy), opt.analysis.gamma_min,
                                     opt.analysis.n_max);
        } catch (const PipelineError&) {
            continue;
        }
        bool all_localized = true;
        for (const auto& f : faults) {
            bool found = false;
            for (const auto& c : cand)
                if (c.id == f.target) found = true;
            all_localized = all_localized && found;
        }
        if (!all_localized) continue;

        // every nonempty subset of the faults must fail at least one test
        bool subsets_ok = true;
        int full = (1 << opt.k) - 1;
        for (int mask = 1; mask < full && subsets_ok; ++mask) {
            Program part = p;
            for (int b = 0; b < opt.k; ++b)
                if (mask & (1 << b)) {
                    Statement* slot =
                        detail::find_statement_mut(part, faults[static_cast<size_t>(b)].target);
                    *slot = faults[static_cast<size_t>(b)].mutated_stmt;
                }
            bool fails = false;
            for (const auto& r : run_suite(part, suite, opt.analysis.step_limit))
                if (r.verdict != Verdict::Pass) fails = true;
            subsets_ok = fails;
        }
        if (!subsets_ok) continue;

        // the repair ingredient must survive in the buggy run's seed pool
        Bitset bcov(static_cast<size_t>(buggy.statement_count));
        for (const auto& r : cov.results)
            for (size_t s = 0; s < static_cast<size_t>(buggy.statement_count); ++s)
                if (r.covered.test(s)) bcov.set(s);
        std::vector<Site> bsites;
        for_each_statement(buggy, [&](const Statement& s, const StmtContext& c) {
            if (bcov.test(static_cast<size_t>(s.global_index)))
                bsites.push_back({&s, c, stmt_text(s)});
        });
        bool ingredients_ok = true;
        for (const auto& f : faults) {
            int module_index = -1;
            for (size_t m = 0; m < buggy.modules.size(); ++m)
                if (buggy.modules[m].name == f.target.module)
                    module_index = static_cast<int>(m);
            bool identical = false, shape = false;
            for (const Site& site : bsites) {
                if (site.ctx.module_index != module_index || site.stmt->id == f.target) continue;
                if (site.text == f.original_text)
                    identical = true;
                else if (detail::renaming_twin(*site.stmt, f.original_stmt))
                    shape = true;
            }
            bool ok = opt.bug_class == BugClass::F ? identical : (!identical && shape);
            ingredients_ok = ingredients_ok && ok;
        }
        if (!ingredients_ok) continue;

        SearchConfig kali_cfg = opt.analysis;
        kali_cfg.variant = Variant::Kali;
        RepairResult kali;
        try {
            RepairContext kctx = prepare_repair(buggy, suite, kali_cfg);
            kali = run_deletion_baseline(kctx);
        } catch (const PipelineError&) {
            continue;
        }
        if (!kali.archive.empty()) continue;

        SeededBug bug;
        bug.bug_class = opt.bug_class;
        bug.k = opt.k;
        bug.seed = opt.seed;
        bug.attempts = attempt;
        bug.failing_tests = static_cast<int>(cov.failing.size());
        std::sort(faults.begin(), faults.end(),
                  [](const SeededFault& a, const SeededFault& b) { return a.target < b.target; });
        for (const auto& f : faults)
            bug.truth.push_back("R " + f.target.str() + " " + f.original_text);
        bug.report.targets_are_candidates = true;
        bug.report.all_subsets_fail = true;
        bug.report.deletion_baseline_blind = true;
        bug.report.notes.push_back("attempt " + std::to_string(attempt) + " of " +
                                   std::to_string(opt.max_attempts));
        bug.report.notes.push_back("candidates " + std::to_string(cand.size()) +
                                   ", failing tests " + std::to_string(cov.failing.size()));
        for (const auto& f : faults)
            bug.report.notes.push_back(f.target.str() + " [" + f.family + "] '" +
                                       f.original_text + "' -> '" + f.mutated_text + "'");
        bug.faults = std::move(faults);
        bug.buggy = std::move(buggy);
        return bug;
    }
    throw PipelineError("ExhaustedAttempts", "no admissible bug after " +
                                                 std::to_string(opt.max_attempts) + " attempts");
}

}  // namespace mlrepair
