#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mlrepair/fault.hpp"
#include "mlrepair/validate.hpp"

namespace mlrepair {

// File and Package both mean "same module" here; Application opens the whole
// program as the seed region.
enum class IngredientMode { File, Package, Application };

struct ScreeningFlags {
    bool match_vars = false;
    bool match_funcs = false;

    bool direct() const { return !match_vars && !match_funcs; }
};

struct ScopeFn {
    std::string module;
    std::string name;
    FuncSig sig;
};

// Everything visible at one location: variables in declaration order (so the
// most recent, innermost declaration is last) and callable functions.
struct Scope {
    std::vector<ScopeVar> vars;
    std::vector<ScopeFn> funcs;  // own module first, then public cross-module
    std::string module;
    const FuncTable* table = nullptr;

    const ScopeVar* find_var(const std::string& name) const {
        for (size_t i = vars.size(); i-- > 0;)
            if (vars[i].name == name) return &vars[i];
        return nullptr;
    }

    // Resolution of a function reference as written at this location.
    const ScopeFn* find_fn(bool qualified, const std::string& written_module,
                           const std::string& name) const {
        const std::string& mod = qualified ? written_module : module;
        for (const auto& f : funcs)
            if (f.module == mod && f.name == name) return &f;
        return nullptr;
    }
};

struct Ingredient {
    Statement stmt;  // as it would appear at the point (possibly rewritten)
    StatementId origin;
    std::vector<std::pair<std::string, std::string>> var_subst;
    std::vector<std::pair<std::string, std::string>> fn_subst;  // display forms

    bool rewritten() const { return !var_subst.empty() || !fn_subst.empty(); }
};

enum class OpKind { Delete = 1, Replace = 2, Insert = 3 };

inline const char* op_name(OpKind op) {
    switch (op) {
        case OpKind::Delete: return "delete";
        case OpKind::Replace: return "replace";
        case OpKind::Insert: return "insert";
    }
    return "?";
}

struct ModificationPoint {
    int index = -1;  // position in the point list (genome coordinate)
    Statement stmt;  // the likely-buggy statement, original coordinates
    StatementId id;
    double susp = 0.0;
    int module_index = -1;
    StmtContext ctx;
    Scope scope;
    std::vector<OpKind> ops;             // O_j, ordinals fixed for the run
    std::vector<Ingredient> ingredients; // I_j', order fixed for the run
};

namespace detail {

inline void scope_functions(const Program& p, const FuncTable& table, const std::string& module,
                            std::vector<ScopeFn>& out) {
    for (const auto& fi : table.all())
        if (fi.module == module) out.push_back(ScopeFn{fi.module, fi.name, fi.sig});
    for (const auto& fi : table.all())
        if (fi.module != module && fi.sig.is_public)
            out.push_back(ScopeFn{fi.module, fi.name, fi.sig});
    (void)p;
}

}  // namespace detail

inline Scope determine_scope(const Program& p, const FuncTable& table, const StatementId& loc) {
    Scope scope;
    bool found = false;
    walk_with_scope(p, [&](const Statement& s, const StmtContext& ctx, const ScopeStack& stack) {
        if (found || s.id != loc) return;
        found = true;
        scope.vars = stack.flatten();
        scope.module = p.modules[static_cast<size_t>(ctx.module_index)].name;
    });
    scope.table = &table;
    if (found) detail::scope_functions(p, table, scope.module, scope.funcs);
    return scope;
}

namespace detail {

// Static check of a statement as if it sat at the screened location.
inline bool check_at_location(const Statement& stmt, const Scope& scope, const StmtContext& ctx) {
    ScopeStack stack;
    stack.push_frame();
    for (const auto& v : scope.vars) stack.declare(v.name, v.type);
    stack.push_frame();
    CallContext calls{scope.table, scope.module};
    StatementChecker checker(calls, ctx.fn_return_type);
    Statement copy = stmt;
    return !checker.check(copy, stack, ctx.in_loop).has_value();
}

inline bool signature_usable(const FuncSig& origin, const FuncSig& at_point) {
    if (origin.params.size() != at_point.params.size()) return false;
    for (size_t i = 0; i < origin.params.size(); ++i)
        if (!assignable(origin.params[i], at_point.params[i])) return false;
    return assignable(at_point.ret, origin.ret);
}

inline std::vector<std::string> internal_decl_names(const Statement& s) {
    std::vector<std::string> out;
    auto walk = [&](auto&& self, const Statement& st) -> void {
        if (st.kind == StmtKind::VarDecl) out.push_back(st.name);
        for (const auto& c : st.body) self(self, c);
        for (const auto& c : st.else_body) self(self, c);
    };
    walk(walk, s);
    return out;
}

struct RenamePlan {
    std::map<std::string, std::string> vars;
    // key: written form (qualified flag, module, name); value: target
    std::map<std::string, std::pair<std::string, std::string>> funcs;
};

inline void rename_expr(Expr& e, const RenamePlan& plan,
                        const std::vector<std::vector<std::string>>& bound,
                        const std::string& point_module) {
    if (e.kind == ExprKind::VarRef) {
        bool is_bound = false;
        for (const auto& frame : bound)
            for (const auto& b : frame)
                if (b == e.name) is_bound = true;
        if (!is_bound) {
            auto it = plan.vars.find(e.name);
            if (it != plan.vars.end()) e.name = it->second;
        }
    } else if (e.kind == ExprKind::Call) {
        std::string key = e.target_module.empty() ? e.name : e.target_module + "." + e.name;
        auto it = plan.funcs.find(key);
        if (it != plan.funcs.end()) {
            e.target_module = it->second.first == point_module ? "" : it->second.first;
            e.name = it->second.second;
        }
    }
    for (auto& a : e.args) rename_expr(a, plan, bound, point_module);
}

inline void rename_stmt(Statement& s, const RenamePlan& plan,
                        std::vector<std::vector<std::string>>& bound,
                        const std::string& point_module) {
    switch (s.kind) {
        case StmtKind::VarDecl:
            rename_expr(s.expr(), plan, bound, point_module);
            bound.back().push_back(s.name);
            break;
        case StmtKind::Assign: {
            bool is_bound = false;
            for (const auto& frame : bound)
                for (const auto& b : frame)
                    if (b == s.name) is_bound = true;
            if (!is_bound) {
                auto it = plan.vars.find(s.name);
                if (it != plan.vars.end()) s.name = it->second;
            }
            rename_expr(s.expr(), plan, bound, point_module);
            break;
        }
        default:
            if (s.has_expr()) rename_expr(s.expr(), plan, bound, point_module);
            break;
    }
    if (!s.body.empty() || !s.else_body.empty()) {
        bound.emplace_back();
        for (auto& c : s.body) rename_stmt(c, plan, bound, point_module);
        bound.pop_back();
        bound.emplace_back();
        for (auto& c : s.else_body) rename_stmt(c, plan, bound, point_module);
        bound.pop_back();
    }
}

}  // namespace detail

inline bool in_region(const SeedStatement& seed, int point_module_index, IngredientMode mode) {
    return mode == IngredientMode::Application || seed.module_index == point_module_index;
}

// Direct screening: the seed must sit in the region, every name it mentions
// must resolve at the point with a type compatible with its origin, and the
// statement must type-check in place.
inline std::optional<Ingredient> screen_direct(const SeedStatement& seed, const Scope& scope,
                                               IngredientMode mode, const StmtContext& ctx,
                                               int point_module_index) {
    if (!in_region(seed, point_module_index, mode)) return std::nullopt;
    for (const auto& v : seed.var_types) {
        const ScopeVar* at_point = scope.find_var(v.name);
        if (!at_point || !assignable(v.type, at_point->type)) return std::nullopt;
    }
    for (const auto& f : seed.fn_refs) {
        bool qualified = f.display.find('.') != std::string::npos;
        const ScopeFn* at_point = scope.find_fn(qualified, f.module, f.name);
        if (!at_point || !detail::signature_usable(f.sig, at_point->sig)) return std::nullopt;
    }
    if (!detail::check_at_location(seed.stmt, scope, ctx)) return std::nullopt;
    Ingredient ing;
    ing.stmt = seed.stmt;
    ing.origin = seed.origin;
    return ing;
}

// Type matching: out-of-scope variable/function references are injectively
// remapped to compatible in-scope ones (same type preferred, then the nearest
// declaration); in-scope references stay untouched.
inline std::vector<Ingredient> screen_type_match(const SeedStatement& seed, const Scope& scope,
                                                 IngredientMode mode, const StmtContext& ctx,
                                                 int point_module_index, bool match_vars,
                                                 bool match_funcs) {
    if (!in_region(seed, point_module_index, mode)) return {};

    detail::RenamePlan plan;
    std::set<std::string> used_var_targets;
    std::set<std::pair<std::string, std::string>> used_fn_targets;
    std::vector<std::string> internal = detail::internal_decl_names(seed.stmt);
    auto internal_name = [&](const std::string& n) {
        return std::find(internal.begin(), internal.end(), n) != internal.end();
    };

    for (const auto& v : seed.var_types)
        if (scope.find_var(v.name)) used_var_targets.insert(v.name);
    for (const auto& f : seed.fn_refs) {
        bool qualified = f.display.find('.') != std::string::npos;
        if (const ScopeFn* sf = scope.find_fn(qualified, f.module, f.name))
            used_fn_targets.insert({sf->module, sf->name});
    }

    for (const auto& v : seed.var_types) {
        if (scope.find_var(v.name)) continue;  // kept unchanged
        if (!match_vars) return {};
        const ScopeVar* chosen = nullptr;
        // nearest declaration first; same type beats the widening fallback
        for (size_t i = scope.vars.size(); i-- > 0;) {
            const ScopeVar& cand = scope.vars[i];
            if (cand.type != v.type || used_var_targets.count(cand.name) ||
                internal_name(cand.name))
                continue;
            chosen = &cand;
            break;
        }
        if (!chosen) {
            for (size_t i = scope.vars.size(); i-- > 0;) {
                const ScopeVar& cand = scope.vars[i];
                if (cand.type == v.type || !assignable(v.type, cand.type) ||
                    used_var_targets.count(cand.name) || internal_name(cand.name))
                    continue;
                chosen = &cand;
                break;
            }
        }
        if (!chosen) return {};
        plan.vars[v.name] = chosen->name;
        used_var_targets.insert(chosen->name);
    }

    for (const auto& f : seed.fn_refs) {
        bool qualified = f.display.find('.') != std::string::npos;
        if (scope.find_fn(qualified, f.module, f.name)) continue;
        if (!match_funcs) return {};
        const ScopeFn* chosen = nullptr;
        for (const auto& cand : scope.funcs) {
            if (used_fn_targets.count({cand.module, cand.name})) continue;
            if (cand.sig.params == f.sig.params && cand.sig.ret == f.sig.ret) {
                chosen = &cand;
                break;
            }
        }
        if (!chosen) {
            for (const auto& cand : scope.funcs) {
                if (used_fn_targets.count({cand.module, cand.name})) continue;
                if (detail::signature_usable(f.sig, cand.sig)) {
                    chosen = &cand;
                    break;
                }
            }
        }
        if (!chosen) return {};
        plan.funcs[f.display] = {chosen->module, chosen->name};
        used_fn_targets.insert({chosen->module, chosen->name});
    }

    Ingredient ing;
    ing.stmt = seed.stmt;
    ing.origin = seed.origin;
    if (!plan.vars.empty() || !plan.funcs.empty()) {
        std::vector<std::vector<std::string>> bound{{}};
        detail::rename_stmt(ing.stmt, plan, bound, scope.module);
        for (const auto& [from, to] : plan.vars) ing.var_subst.emplace_back(from, to);
        for (const auto& [from, to] : plan.funcs)
            ing.fn_subst.emplace_back(
                from, to.first == scope.module ? to.second : to.first + "." + to.second);
    }
    if (!detail::check_at_location(ing.stmt, scope, ctx)) return {};
    return {std::move(ing)};
}

// Usability rules for a screened ingredient at a concrete candidate:
// continue/break only inside loops, return only type-correct and only at a
// block end, a variable declaration only over the same declaration.
inline bool apply_ingredient_rules(const Statement& candidate, const Ingredient& ing,
                                   const StmtContext& ctx, const Scope& scope) {
    switch (ing.stmt.kind) {
        case StmtKind::Continue:
        case StmtKind::Break:
            return ctx.in_loop;
        case StmtKind::Return: {
            if (!ing.stmt.has_expr()) {
                if (ctx.fn_return_type != ValueType::Void) return false;
            } else {
                if (ctx.fn_return_type == ValueType::Void) return false;
                std::string err;
                auto resolver = [&](const std::string& n) -> const ValueType* {
                    const ScopeVar* v = scope.find_var(n);
                    return v ? &v->type : nullptr;
                };
                CallContext calls{scope.table, scope.module};
                auto t = infer_expr(ing.stmt.expr(), resolver, calls, err);
                if (!t || !assignable(*t, ctx.fn_return_type)) return false;
            }
            return ctx.last_of_block;
        }
        case StmtKind::VarDecl:
            return candidate.kind == StmtKind::VarDecl && candidate.name == ing.stmt.name &&
                   assignable(ing.stmt.decl_type, candidate.decl_type);
        default:
            return true;
    }
}

struct RuleToggles {
    bool operation_rules = true;   // restrict O_j per statement role
    bool ingredient_rules = true;  // restrict I_j' per candidate context
    bool decode_rules = true;      // suppress degenerate edits while decoding
};

inline std::vector<OpKind> customize_operation_types(const Statement& stmt, const StmtContext& ctx,
                                                     bool has_ingredients, bool rules_enabled) {
    std::vector<OpKind> ops;
    bool no_delete = false;
    if (rules_enabled) {
        if (stmt.kind == StmtKind::VarDecl) no_delete = true;
        if (stmt.kind == StmtKind::Return && ctx.last_of_function &&
            ctx.fn_return_type != ValueType::Void)
            no_delete = true;
    }
    if (!no_delete) ops.push_back(OpKind::Delete);
    if (has_ingredients) {
        ops.push_back(OpKind::Replace);
        ops.push_back(OpKind::Insert);
    }
    return ops;
}

inline std::vector<ModificationPoint> build_modification_points(
    const Program& p, const FuncTable& table, const std::vector<SuspiciousStatement>& candidates,
    const std::vector<SeedStatement>& seeds, IngredientMode mode, ScreeningFlags screening,
    const RuleToggles& rules) {
    // one scope walk resolves every candidate location
    std::vector<ModificationPoint> points;
    std::map<int, size_t> by_global;
    for (const auto& c : candidates) {
        ModificationPoint mp;
        mp.id = c.id;
        mp.susp = c.susp;
        by_global[c.global_index] = points.size();
        points.push_back(std::move(mp));
    }
    int found = 0;
    walk_with_scope(p, [&](const Statement& s, const StmtContext& ctx, const ScopeStack& stack) {
        auto it = by_global.find(s.global_index);
        if (it == by_global.end()) return;
        ModificationPoint& mp = points[it->second];
        mp.stmt = s;
        mp.ctx = ctx;
        mp.module_index = ctx.module_index;
        mp.scope.vars = stack.flatten();
        mp.scope.module = p.modules[static_cast<size_t>(ctx.module_index)].name;
        mp.scope.table = &table;
        ++found;
    });
    (void)found;

    std::map<std::string, std::vector<ScopeFn>> fn_cache;
    for (auto& mp : points) {
        auto it = fn_cache.find(mp.scope.module);
        if (it == fn_cache.end()) {
            std::vector<ScopeFn> fns;
            detail::scope_functions(p, table, mp.scope.module, fns);
            it = fn_cache.emplace(mp.scope.module, std::move(fns)).first;
        }
        mp.scope.funcs = it->second;

        std::vector<std::string> seen;
        for (const auto& seed : seeds) {
            std::vector<Ingredient> produced;
            if (screening.direct()) {
                if (auto ing = screen_direct(seed, mp.scope, mode, mp.ctx, mp.module_index))
                    produced.push_back(std::move(*ing));
            } else {
                produced = screen_type_match(seed, mp.scope, mode, mp.ctx, mp.module_index,
                                             screening.match_vars, screening.match_funcs);
            }
            for (auto& ing : produced) {
                if (rules.ingredient_rules &&
                    !apply_ingredient_rules(mp.stmt, ing, mp.ctx, mp.scope))
                    continue;
                std::string key = stmt_text(ing.stmt);
                if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
                seen.push_back(std::move(key));
                mp.ingredients.push_back(std::move(ing));
            }
        }
        mp.ops = customize_operation_types(mp.stmt, mp.ctx, !mp.ingredients.empty(),
                                           rules.operation_rules);
    }

    std::erase_if(points, [](const ModificationPoint& mp) { return mp.ops.empty(); });
    if (points.empty())
        throw PipelineError("NoModificationPoints", "every candidate point collapsed");
    for (size_t j = 0; j < points.size(); ++j) points[j].index = static_cast<int>(j);
    return points;
}

}  // namespace mlrepair
