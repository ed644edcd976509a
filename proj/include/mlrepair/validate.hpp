#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mlrepair/ast.hpp"
#include "mlrepair/printer.hpp"

namespace mlrepair {

struct StaticError {
    std::string message;
    std::string where;  // "module", "module.function", or a statement id

    std::string str() const { return where.empty() ? message : where + ": " + message; }
};

struct FuncSig {
    std::vector<ValueType> params;
    ValueType ret = ValueType::Void;
    bool is_public = false;

    bool operator==(const FuncSig&) const = default;
};

struct FuncInfo {
    std::string module;
    std::string name;
    FuncSig sig;
};

class FuncTable {
public:
    static FuncTable build(const Program& p) {
        FuncTable t;
        for (const auto& m : p.modules) {
            for (const auto& f : m.functions) {
                FuncSig sig;
                for (const auto& prm : f.params) sig.params.push_back(prm.type);
                sig.ret = f.return_type;
                sig.is_public = f.is_public;
                t.fns_.push_back(FuncInfo{m.name, f.name, std::move(sig)});
            }
        }
        return t;
    }

    const FuncInfo* find(std::string_view module, std::string_view name) const {
        for (const auto& f : fns_)
            if (f.module == module && f.name == name) return &f;
        return nullptr;
    }

    const std::vector<FuncInfo>& all() const { return fns_; }

private:
    std::vector<FuncInfo> fns_;
};

// Function lookup as seen from one module: unqualified calls stay inside the
// module, qualified calls require the target to be public (or local).
struct CallContext {
    const FuncTable* table = nullptr;
    std::string current_module;

    const FuncInfo* lookup(const std::string& target_module, const std::string& name,
                           std::string* err) const {
        const std::string& mod = target_module.empty() ? current_module : target_module;
        const FuncInfo* fi = table->find(mod, name);
        if (!fi) {
            if (err) *err = "undefined function '" + qualify(target_module, name) + "'";
            return nullptr;
        }
        if (!target_module.empty() && target_module != current_module && !fi->sig.is_public) {
            if (err) *err = "function '" + qualify(target_module, name) + "' is not public";
            return nullptr;
        }
        return fi;
    }

    static std::string qualify(const std::string& m, const std::string& n) {
        return m.empty() ? n : m + "." + n;
    }
};

struct ScopeVar {
    std::string name;
    ValueType type = ValueType::Int;
};

// Lexical scope with block frames. Declaration order is preserved, so the
// most recently declared visible variable is the one nearest the location.
class ScopeStack {
public:
    void push_frame() { marks_.push_back(vars_.size()); }

    void pop_frame() {
        vars_.resize(marks_.back());
        marks_.pop_back();
    }

    // False when the name already exists in the current frame.
    bool declare(const std::string& name, ValueType type) {
        for (size_t i = marks_.empty() ? 0 : marks_.back(); i < vars_.size(); ++i)
            if (vars_[i].name == name) return false;
        vars_.push_back(ScopeVar{name, type});
        return true;
    }

    const ScopeVar* resolve(const std::string& name) const {
        for (size_t i = vars_.size(); i-- > 0;)
            if (vars_[i].name == name) return &vars_[i];
        return nullptr;
    }

    // Shadow-resolved view, least recent first.
    std::vector<ScopeVar> flatten() const {
        std::vector<ScopeVar> out;
        for (const auto& v : vars_) {
            for (size_t i = 0; i < out.size(); ++i) {
                if (out[i].name == v.name) {
                    out.erase(out.begin() + static_cast<long>(i));
                    break;
                }
            }
            out.push_back(v);
        }
        return out;
    }

private:
    std::vector<ScopeVar> vars_;
    std::vector<size_t> marks_;
};

namespace detail {

inline bool require_value(std::optional<ValueType> t, std::string& err) {
    if (!t) return false;
    if (*t == ValueType::Void) {
        err = "void value used in an expression";
        return false;
    }
    return true;
}

}  // namespace detail

// Expression type inference shared by whole-program validation and by the
// as-if checks used when screening ingredients. Resolver maps a variable name
// to its type (null when not in scope).
template <typename Resolver>
std::optional<ValueType> infer_expr(const Expr& e, const Resolver& vars, const CallContext& calls,
                                    std::string& err) {
    switch (e.kind) {
        case ExprKind::IntLit: return ValueType::Int;
        case ExprKind::FloatLit: return ValueType::Float;
        case ExprKind::BoolLit: return ValueType::Bool;
        case ExprKind::StrLit: return ValueType::Str;
        case ExprKind::VarRef: {
            const ValueType* t = vars(e.name);
            if (!t) {
                err = "undefined variable '" + e.name + "'";
                return std::nullopt;
            }
            return *t;
        }
        case ExprKind::Unary: {
            auto t = infer_expr(e.args[0], vars, calls, err);
            if (!detail::require_value(t, err)) return std::nullopt;
            if (e.uop == UnaryOp::Neg) {
                if (*t == ValueType::Int || *t == ValueType::Float) return t;
                err = "operator '-' requires a numeric operand";
                return std::nullopt;
            }
            if (*t != ValueType::Bool) {
                err = "operator '!' requires a bool operand";
                return std::nullopt;
            }
            return ValueType::Bool;
        }
        case ExprKind::Binary: {
            auto lt = infer_expr(e.args[0], vars, calls, err);
            if (!detail::require_value(lt, err)) return std::nullopt;
            auto rt = infer_expr(e.args[1], vars, calls, err);
            if (!detail::require_value(rt, err)) return std::nullopt;
            bool l_num = *lt == ValueType::Int || *lt == ValueType::Float;
            bool r_num = *rt == ValueType::Int || *rt == ValueType::Float;
            switch (e.bop) {
                case BinaryOp::Add:
                    if (*lt == ValueType::Str && *rt == ValueType::Str) return ValueType::Str;
                    [[fallthrough]];
                case BinaryOp::Sub:
                case BinaryOp::Mul:
                case BinaryOp::Div:
                    if (l_num && r_num)
                        return (*lt == ValueType::Float || *rt == ValueType::Float)
                                   ? ValueType::Float
                                   : ValueType::Int;
                    err = std::string("operator '") + binary_op_text(e.bop) +
                          "' requires numeric operands";
                    return std::nullopt;
                case BinaryOp::Mod:
                    if (*lt == ValueType::Int && *rt == ValueType::Int) return ValueType::Int;
                    err = "operator '%' requires int operands";
                    return std::nullopt;
                case BinaryOp::Eq:
                case BinaryOp::Ne:
                    if (*lt == *rt || (l_num && r_num)) return ValueType::Bool;
                    err = "cannot compare values of different types";
                    return std::nullopt;
                case BinaryOp::Lt:
                case BinaryOp::Le:
                case BinaryOp::Gt:
                case BinaryOp::Ge:
                    if (l_num && r_num) return ValueType::Bool;
                    err = std::string("operator '") + binary_op_text(e.bop) +
                          "' requires numeric operands";
                    return std::nullopt;
                case BinaryOp::And:
                case BinaryOp::Or:
                    if (*lt == ValueType::Bool && *rt == ValueType::Bool) return ValueType::Bool;
                    err = std::string("operator '") + binary_op_text(e.bop) +
                          "' requires bool operands";
                    return std::nullopt;
            }
            return std::nullopt;
        }
        case ExprKind::Call: {
            const FuncInfo* fi = calls.lookup(e.target_module, e.name, &err);
            if (!fi) return std::nullopt;
            if (e.args.size() != fi->sig.params.size()) {
                err = "function '" + CallContext::qualify(e.target_module, e.name) + "' expects " +
                      std::to_string(fi->sig.params.size()) + " arguments, got " +
                      std::to_string(e.args.size());
                return std::nullopt;
            }
            for (size_t i = 0; i < e.args.size(); ++i) {
                auto at = infer_expr(e.args[i], vars, calls, err);
                if (!detail::require_value(at, err)) return std::nullopt;
                if (!assignable(*at, fi->sig.params[i])) {
                    err = "argument " + std::to_string(i + 1) + " of '" +
                          CallContext::qualify(e.target_module, e.name) + "': expected " +
                          type_name(fi->sig.params[i]) + ", got " + type_name(*at);
                    return std::nullopt;
                }
            }
            return fi->sig.ret;
        }
    }
    return std::nullopt;
}

// Checks one statement (recursively) against an existing scope, as the
// validator does for real code and the screener does for hypothetical edits.
class StatementChecker {
public:
    StatementChecker(CallContext calls, ValueType fn_return)
        : calls_(std::move(calls)), fn_return_(fn_return) {}

    std::optional<StaticError> check(const Statement& s, ScopeStack& scope, bool in_loop) {
        std::string err;
        auto resolver = [&scope](const std::string& n) -> const ValueType* {
            const ScopeVar* v = scope.resolve(n);
            return v ? &v->type : nullptr;
        };
        auto fail = [&](std::string msg) {
            return StaticError{std::move(msg), s.id.ordinal >= 0 ? s.id.str() : ""};
        };
        switch (s.kind) {
            case StmtKind::VarDecl: {
                auto t = infer_expr(s.expr(), resolver, calls_, err);
                if (!detail::require_value(t, err)) return fail(err);
                if (!assignable(*t, s.decl_type))
                    return fail("cannot initialize " + std::string(type_name(s.decl_type)) +
                                " variable '" + s.name + "' with " + type_name(*t));
                if (!scope.declare(s.name, s.decl_type))
                    return fail("redeclaration of '" + s.name + "' in the same block");
                return std::nullopt;
            }
            case StmtKind::Assign: {
                const ScopeVar* v = scope.resolve(s.name);
                if (!v) return fail("undefined variable '" + s.name + "'");
                auto t = infer_expr(s.expr(), resolver, calls_, err);
                if (!detail::require_value(t, err)) return fail(err);
                if (!assignable(*t, v->type))
                    return fail("cannot assign " + std::string(type_name(*t)) + " to " +
                                type_name(v->type) + " variable '" + s.name + "'");
                return std::nullopt;
            }
            case StmtKind::If:
            case StmtKind::While: {
                auto t = infer_expr(s.expr(), resolver, calls_, err);
                if (!detail::require_value(t, err)) return fail(err);
                if (*t != ValueType::Bool)
                    return fail(std::string(s.kind == StmtKind::If ? "if" : "while") +
                                " condition must be bool, got " + type_name(*t));
                bool body_in_loop = in_loop || s.kind == StmtKind::While;
                scope.push_frame();
                for (const auto& c : s.body) {
                    if (auto e = check(c, scope, body_in_loop)) {
                        scope.pop_frame();
                        return e;
                    }
                }
                scope.pop_frame();
                if (s.has_else) {
                    scope.push_frame();
                    for (const auto& c : s.else_body) {
                        if (auto e = check(c, scope, body_in_loop)) {
                            scope.pop_frame();
                            return e;
                        }
                    }
                    scope.pop_frame();
                }
                return std::nullopt;
            }
            case StmtKind::Return: {
                if (fn_return_ == ValueType::Void) {
                    if (s.has_expr()) return fail("return with a value in a void function");
                    return std::nullopt;
                }
                if (!s.has_expr()) return fail("return without a value");
                auto t = infer_expr(s.expr(), resolver, calls_, err);
                if (!detail::require_value(t, err)) return fail(err);
                if (!assignable(*t, fn_return_))
                    return fail(std::string("cannot return ") + type_name(*t) + " from a " +
                                type_name(fn_return_) + " function");
                return std::nullopt;
            }
            case StmtKind::Break:
                if (!in_loop) return fail("break outside a loop");
                return std::nullopt;
            case StmtKind::Continue:
                if (!in_loop) return fail("continue outside a loop");
                return std::nullopt;
            case StmtKind::CallStmt: {
                if (!infer_expr(s.expr(), resolver, calls_, err)) return fail(err);
                return std::nullopt;
            }
        }
        return std::nullopt;
    }

private:
    CallContext calls_;
    ValueType fn_return_;
};

inline bool block_returns(const std::vector<Statement>& block) {
    for (const auto& s : block) {
        if (s.kind == StmtKind::Return) return true;
        if (s.kind == StmtKind::If && s.has_else && block_returns(s.body) &&
            block_returns(s.else_body))
            return true;
    }
    return false;
}

// Visits every statement together with the lexical scope in force just before
// it, plus its position facts. The scope object is reused; callers must copy
// (or flatten) what they need.
template <typename F>
void walk_with_scope(const Program& p, F&& fn) {
    for (size_t mi = 0; mi < p.modules.size(); ++mi) {
        const auto& m = p.modules[mi];
        ScopeStack scope;
        scope.push_frame();
        for (const auto& g : m.globals) scope.declare(g.name, g.type);
        for (size_t fi = 0; fi < m.functions.size(); ++fi) {
            const auto& f = m.functions[fi];
            scope.push_frame();
            for (const auto& prm : f.params) scope.declare(prm.name, prm.type);
            scope.push_frame();
            StmtContext base;
            base.module_index = static_cast<int>(mi);
            base.function_index = static_cast<int>(fi);
            base.fn_return_type = f.return_type;

            auto walk = [&](auto&& self, const std::vector<Statement>& block, bool in_loop,
                            bool top_level) -> void {
                for (size_t i = 0; i < block.size(); ++i) {
                    const Statement& s = block[i];
                    StmtContext ctx = base;
                    ctx.in_loop = in_loop;
                    ctx.last_of_block = (i + 1 == block.size());
                    ctx.last_of_function = top_level && ctx.last_of_block;
                    fn(s, ctx, const_cast<const ScopeStack&>(scope));
                    if (s.kind == StmtKind::VarDecl) {
                        scope.declare(s.name, s.decl_type);
                    } else if (s.kind == StmtKind::If || s.kind == StmtKind::While) {
                        bool body_in_loop = in_loop || s.kind == StmtKind::While;
                        scope.push_frame();
                        self(self, s.body, body_in_loop, false);
                        scope.pop_frame();
                        if (s.has_else) {
                            scope.push_frame();
                            self(self, s.else_body, body_in_loop, false);
                            scope.pop_frame();
                        }
                    }
                }
            };
            walk(walk, f.body, false, true);
            scope.pop_frame();
            scope.pop_frame();
        }
    }
}

inline std::optional<StaticError> validate_program(const Program& p) {
    FuncTable table = FuncTable::build(p);
    for (size_t i = 0; i < p.modules.size(); ++i)
        for (size_t j = i + 1; j < p.modules.size(); ++j)
            if (p.modules[i].name == p.modules[j].name)
                return StaticError{"duplicate module '" + p.modules[i].name + "'", ""};

    for (const auto& m : p.modules) {
        for (size_t i = 0; i < m.functions.size(); ++i)
            for (size_t j = i + 1; j < m.functions.size(); ++j)
                if (m.functions[i].name == m.functions[j].name)
                    return StaticError{"duplicate function '" + m.functions[i].name + "'", m.name};
        for (size_t i = 0; i < m.globals.size(); ++i)
            for (size_t j = i + 1; j < m.globals.size(); ++j)
                if (m.globals[i].name == m.globals[j].name)
                    return StaticError{"duplicate global '" + m.globals[i].name + "'", m.name};

        CallContext calls{&table, m.name};
        for (const auto& g : m.globals) {
            std::string err;
            auto none = [](const std::string&) -> const ValueType* { return nullptr; };
            auto t = infer_expr(g.init, none, calls, err);
            if (!t) return StaticError{err, m.name + "." + g.name};
            if (!assignable(*t, g.type))
                return StaticError{"cannot initialize " + std::string(type_name(g.type)) +
                                       " global '" + g.name + "' with " + type_name(*t),
                                   m.name};
        }

        for (const auto& f : m.functions) {
            const std::string where = m.name + "." + f.name;
            ScopeStack scope;
            scope.push_frame();
            for (const auto& g : m.globals) scope.declare(g.name, g.type);
            scope.push_frame();
            for (const auto& prm : f.params)
                if (!scope.declare(prm.name, prm.type))
                    return StaticError{"duplicate parameter '" + prm.name + "'", where};
            scope.push_frame();
            StatementChecker checker(calls, f.return_type);
            for (const auto& s : f.body)
                if (auto e = checker.check(s, scope, false)) return e;
            if (f.return_type != ValueType::Void && !block_returns(f.body))
                return StaticError{"control flow can reach the end of a non-void function",
                                   where};
        }
    }
    return std::nullopt;
}

}  // namespace mlrepair
