#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mlrepair {

enum class ValueType { Int, Float, Bool, Str, Void };

inline const char* type_name(ValueType t) {
    switch (t) {
        case ValueType::Int: return "int";
        case ValueType::Float: return "float";
        case ValueType::Bool: return "bool";
        case ValueType::Str: return "str";
        case ValueType::Void: return "void";
    }
    return "?";
}

// The only implicit conversion in the language: int widens to float.
inline bool assignable(ValueType from, ValueType to) {
    return from == to || (from == ValueType::Int && to == ValueType::Float);
}

// Stable statement address: enclosing module, enclosing function, and the
// statement's position in a pre-order walk of the function body (0-based).
struct StatementId {
    std::string module;
    std::string function;
    int ordinal = -1;

    bool operator==(const StatementId&) const = default;
    auto operator<=>(const StatementId&) const = default;

    std::string str() const {
        return module + ":" + function + ":" + std::to_string(ordinal);
    }
};

enum class ExprKind { IntLit, FloatLit, BoolLit, StrLit, VarRef, Unary, Binary, Call };

enum class UnaryOp { Neg, Not };

enum class BinaryOp { Add, Sub, Mul, Div, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

inline bool is_arith(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add:
        case BinaryOp::Sub:
        case BinaryOp::Mul:
        case BinaryOp::Div:
        case BinaryOp::Mod: return true;
        default: return false;
    }
}

inline bool is_comparison(BinaryOp op) {
    switch (op) {
        case BinaryOp::Eq:
        case BinaryOp::Ne:
        case BinaryOp::Lt:
        case BinaryOp::Le:
        case BinaryOp::Gt:
        case BinaryOp::Ge: return true;
        default: return false;
    }
}

struct Expr {
    ExprKind kind = ExprKind::IntLit;
    int64_t int_val = 0;
    double float_val = 0.0;
    bool bool_val = false;
    std::string str_val;
    std::string name;           // VarRef name, or call target
    std::string target_module;  // qualified call: module part, else empty
    UnaryOp uop = UnaryOp::Neg;
    BinaryOp bop = BinaryOp::Add;
    std::vector<Expr> args;  // unary operand, binary lhs/rhs, or call arguments

    static Expr int_lit(int64_t v) {
        Expr e;
        e.kind = ExprKind::IntLit;
        e.int_val = v;
        return e;
    }
    static Expr float_lit(double v) {
        Expr e;
        e.kind = ExprKind::FloatLit;
        e.float_val = v;
        return e;
    }
    static Expr bool_lit(bool v) {
        Expr e;
        e.kind = ExprKind::BoolLit;
        e.bool_val = v;
        return e;
    }
    static Expr str_lit(std::string v) {
        Expr e;
        e.kind = ExprKind::StrLit;
        e.str_val = std::move(v);
        return e;
    }
    static Expr var(std::string n) {
        Expr e;
        e.kind = ExprKind::VarRef;
        e.name = std::move(n);
        return e;
    }
    static Expr unary(UnaryOp op, Expr operand) {
        Expr e;
        e.kind = ExprKind::Unary;
        e.uop = op;
        e.args.push_back(std::move(operand));
        return e;
    }
    static Expr binary(BinaryOp op, Expr lhs, Expr rhs) {
        Expr e;
        e.kind = ExprKind::Binary;
        e.bop = op;
        e.args.push_back(std::move(lhs));
        e.args.push_back(std::move(rhs));
        return e;
    }
};

enum class StmtKind { VarDecl, Assign, If, While, Return, Break, Continue, CallStmt };

struct Statement {
    StmtKind kind = StmtKind::Assign;
    StatementId id;          // assigned by finalize()
    int global_index = -1;   // dense index across the whole program, by finalize()
    std::string name;        // VarDecl name or Assign target
    ValueType decl_type = ValueType::Void;
    std::vector<Expr> exprs;          // 0 or 1: initializer / rhs / condition / call / return value
    std::vector<Statement> body;      // if-then or while body
    std::vector<Statement> else_body;
    bool has_else = false;

    bool has_expr() const { return !exprs.empty(); }
    const Expr& expr() const { return exprs.front(); }
    Expr& expr() { return exprs.front(); }
};

struct Param {
    std::string name;
    ValueType type = ValueType::Int;
};

struct GlobalDecl {
    std::string name;
    ValueType type = ValueType::Int;
    Expr init;  // literal, possibly under unary minus
};

struct FunctionDef {
    std::string name;
    bool is_public = false;
    std::vector<Param> params;
    ValueType return_type = ValueType::Void;
    std::vector<Statement> body;
};

struct SourceModule {
    std::string name;
    std::vector<GlobalDecl> globals;
    std::vector<FunctionDef> functions;
};

struct Program {
    std::vector<SourceModule> modules;
    int statement_count = 0;  // set by finalize()
};

namespace detail {

inline void number_block(std::vector<Statement>& block, const std::string& mod,
                         const std::string& fn, int& ordinal, int& global) {
    for (auto& s : block) {
        s.id = StatementId{mod, fn, ordinal++};
        s.global_index = global++;
        number_block(s.body, mod, fn, ordinal, global);
        number_block(s.else_body, mod, fn, ordinal, global);
    }
}

}  // namespace detail

// Assign statement ids and dense global indices; call after parsing and after
// any structural edit.
inline void finalize(Program& p) {
    int global = 0;
    for (auto& m : p.modules) {
        for (auto& f : m.functions) {
            int ordinal = 0;
            detail::number_block(f.body, m.name, f.name, ordinal, global);
        }
    }
    p.statement_count = global;
}

// Position facts a statement's surroundings determine: used by operation
// customization, screening rules, and scope building.
struct StmtContext {
    int module_index = -1;
    int function_index = -1;
    bool in_loop = false;           // nested anywhere inside a while
    bool last_of_block = false;     // last statement of its immediate block
    bool last_of_function = false;  // last statement of the function's top-level block
    ValueType fn_return_type = ValueType::Void;
};

namespace detail {

template <typename F>
void walk_block(const std::vector<Statement>& block, StmtContext ctx, bool top_level, F&& fn) {
    for (size_t i = 0; i < block.size(); ++i) {
        StmtContext c = ctx;
        c.last_of_block = (i + 1 == block.size());
        c.last_of_function = top_level && c.last_of_block;
        fn(block[i], c);
        StmtContext inner = ctx;
        inner.in_loop = ctx.in_loop || block[i].kind == StmtKind::While;
        walk_block(block[i].body, inner, false, fn);
        walk_block(block[i].else_body, inner, false, fn);
    }
}

}  // namespace detail

template <typename F>
void for_each_statement(const Program& p, F&& fn) {
    for (size_t mi = 0; mi < p.modules.size(); ++mi) {
        const auto& m = p.modules[mi];
        for (size_t fi = 0; fi < m.functions.size(); ++fi) {
            const auto& f = m.functions[fi];
            StmtContext ctx;
            ctx.module_index = static_cast<int>(mi);
            ctx.function_index = static_cast<int>(fi);
            ctx.fn_return_type = f.return_type;
            detail::walk_block(f.body, ctx, true, fn);
        }
    }
}

struct FoundStatement {
    const Statement* stmt = nullptr;
    StmtContext ctx;
};

inline std::optional<FoundStatement> find_statement(const Program& p, const StatementId& id) {
    std::optional<FoundStatement> out;
    for_each_statement(p, [&](const Statement& s, const StmtContext& ctx) {
        if (!out && s.id == id) out = FoundStatement{&s, ctx};
    });
    return out;
}

inline const FunctionDef* find_function(const SourceModule& m, const std::string& name) {
    for (const auto& f : m.functions)
        if (f.name == name) return &f;
    return nullptr;
}

inline int module_index_of(const Program& p, const std::string& name) {
    for (size_t i = 0; i < p.modules.size(); ++i)
        if (p.modules[i].name == name) return static_cast<int>(i);
    return -1;
}

// Names a statement refers to but does not itself bind: variables (reads and
// assignment targets) and called functions, each in first-occurrence order.
struct FreeNames {
    std::vector<std::string> vars;
    std::vector<std::pair<std::string, std::string>> funcs;  // (module or "", name)
};

namespace detail {

struct FreeNameCollector {
    FreeNames out;
    std::vector<std::vector<std::string>> bound{{}};

    bool is_bound(const std::string& n) const {
        for (const auto& frame : bound)
            for (const auto& b : frame)
                if (b == n) return true;
        return false;
    }

    void add_var(const std::string& n) {
        if (is_bound(n)) return;
        for (const auto& v : out.vars)
            if (v == n) return;
        out.vars.push_back(n);
    }

    void add_func(const std::string& m, const std::string& n) {
        for (const auto& f : out.funcs)
            if (f.first == m && f.second == n) return;
        out.funcs.emplace_back(m, n);
    }

    void visit(const Expr& e) {
        if (e.kind == ExprKind::VarRef) add_var(e.name);
        if (e.kind == ExprKind::Call) add_func(e.target_module, e.name);
        for (const auto& a : e.args) visit(a);
    }

    void visit_block(const std::vector<Statement>& block) {
        bound.emplace_back();
        for (const auto& s : block) visit(s);
        bound.pop_back();
    }

    void visit(const Statement& s) {
        switch (s.kind) {
            case StmtKind::VarDecl:
                visit(s.expr());
                bound.back().push_back(s.name);
                break;
            case StmtKind::Assign:
                add_var(s.name);
                visit(s.expr());
                break;
            case StmtKind::If:
                visit(s.expr());
                visit_block(s.body);
                if (s.has_else) visit_block(s.else_body);
                break;
            case StmtKind::While:
                visit(s.expr());
                visit_block(s.body);
                break;
            case StmtKind::Return:
            case StmtKind::CallStmt:
                if (s.has_expr()) visit(s.expr());
                break;
            default: break;
        }
    }
};

}  // namespace detail

inline FreeNames collect_free_names(const Statement& s) {
    detail::FreeNameCollector c;
    c.visit(s);
    return std::move(c.out);
}

}  // namespace mlrepair
