#pragma once

#include <charconv>
#include <string>

#include "mlrepair/ast.hpp"

namespace mlrepair {

// Shortest round-tripping decimal form, always spelled as a float literal.
inline std::string float_text(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, ptr);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
        s += ".0";
    return s;
}

inline std::string escape_str(const std::string& raw) {
    std::string out = "\"";
    for (char c : raw) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

inline const char* binary_op_text(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Mod: return "%";
        case BinaryOp::Eq: return "==";
        case BinaryOp::Ne: return "!=";
        case BinaryOp::Lt: return "<";
        case BinaryOp::Le: return "<=";
        case BinaryOp::Gt: return ">";
        case BinaryOp::Ge: return ">=";
        case BinaryOp::And: return "&&";
        case BinaryOp::Or: return "||";
    }
    return "?";
}

namespace detail {

inline int precedence(BinaryOp op) {
    switch (op) {
        case BinaryOp::Or: return 1;
        case BinaryOp::And: return 2;
        case BinaryOp::Eq:
        case BinaryOp::Ne:
        case BinaryOp::Lt:
        case BinaryOp::Le:
        case BinaryOp::Gt:
        case BinaryOp::Ge: return 3;
        case BinaryOp::Add:
        case BinaryOp::Sub: return 4;
        default: return 5;
    }
}

inline void print_expr(const Expr& e, std::string& out, int min_level) {
    switch (e.kind) {
        case ExprKind::IntLit:
            out += std::to_string(e.int_val);
            break;
        case ExprKind::FloatLit:
            out += float_text(e.float_val);
            break;
        case ExprKind::BoolLit:
            out += e.bool_val ? "true" : "false";
            break;
        case ExprKind::StrLit:
            out += escape_str(e.str_val);
            break;
        case ExprKind::VarRef:
            out += e.name;
            break;
        case ExprKind::Call: {
            if (!e.target_module.empty()) {
                out += e.target_module;
                out += '.';
            }
            out += e.name;
            out += '(';
            for (size_t i = 0; i < e.args.size(); ++i) {
                if (i) out += ", ";
                print_expr(e.args[i], out, 0);
            }
            out += ')';
            break;
        }
        case ExprKind::Unary: {
            out += e.uop == UnaryOp::Neg ? '-' : '!';
            const Expr& operand = e.args[0];
            bool parens = operand.kind == ExprKind::Unary || operand.kind == ExprKind::Binary;
            if (parens) out += '(';
            print_expr(operand, out, 0);
            if (parens) out += ')';
            break;
        }
        case ExprKind::Binary: {
            int level = precedence(e.bop);
            bool parens = level < min_level;
            if (parens) out += '(';
            // Left-associative chain: the right operand needs strictly higher
            // binding; comparisons are non-associative so both sides do.
            int left_min = is_comparison(e.bop) ? level + 1 : level;
            print_expr(e.args[0], out, left_min);
            out += ' ';
            out += binary_op_text(e.bop);
            out += ' ';
            print_expr(e.args[1], out, level + 1);
            if (parens) out += ')';
            break;
        }
    }
}

}  // namespace detail

inline std::string expr_text(const Expr& e) {
    std::string out;
    detail::print_expr(e, out, 0);
    return out;
}

namespace detail {

inline void print_stmt_head(const Statement& s, std::string& out) {
    switch (s.kind) {
        case StmtKind::VarDecl:
            out += "var " + s.name + ": ";
            out += type_name(s.decl_type);
            out += " = " + expr_text(s.expr());
            break;
        case StmtKind::Assign:
            out += s.name + " = " + expr_text(s.expr());
            break;
        case StmtKind::Return:
            out += "return";
            if (s.has_expr()) out += " " + expr_text(s.expr());
            break;
        case StmtKind::Break:
            out += "break";
            break;
        case StmtKind::Continue:
            out += "continue";
            break;
        case StmtKind::CallStmt:
            out += expr_text(s.expr());
            break;
        default:
            break;
    }
}

inline void print_stmt_inline(const Statement& s, std::string& out);

inline void print_block_inline(const std::vector<Statement>& block, std::string& out) {
    out += "{ ";
    for (size_t i = 0; i < block.size(); ++i) {
        if (i) out += "; ";
        print_stmt_inline(block[i], out);
    }
    out += " }";
}

inline void print_stmt_inline(const Statement& s, std::string& out) {
    if (s.kind == StmtKind::If) {
        out += "if " + expr_text(s.expr()) + ' ';
        print_block_inline(s.body, out);
        if (s.has_else) {
            out += " else ";
            print_block_inline(s.else_body, out);
        }
    } else if (s.kind == StmtKind::While) {
        out += "while " + expr_text(s.expr()) + ' ';
        print_block_inline(s.body, out);
    } else {
        print_stmt_head(s, out);
    }
}

inline void print_stmt_source(const Statement& s, std::string& out, int depth) {
    std::string pad(static_cast<size_t>(depth) * 2, ' ');
    out += pad;
    if (s.kind == StmtKind::If) {
        out += "if " + expr_text(s.expr()) + " {\n";
        for (const auto& c : s.body) print_stmt_source(c, out, depth + 1);
        if (s.has_else) {
            out += pad + "} else {\n";
            for (const auto& c : s.else_body) print_stmt_source(c, out, depth + 1);
        }
        out += pad + "}\n";
    } else if (s.kind == StmtKind::While) {
        out += "while " + expr_text(s.expr()) + " {\n";
        for (const auto& c : s.body) print_stmt_source(c, out, depth + 1);
        out += pad + "}\n";
    } else {
        print_stmt_head(s, out);
        out += '\n';
    }
}

}  // namespace detail

// One-line rendering; also serves as the structural-equality key (the grammar
// is unambiguous, so equal text means equal tree).
inline std::string stmt_text(const Statement& s) {
    std::string out;
    detail::print_stmt_inline(s, out);
    return out;
}

inline bool stmt_equal(const Statement& a, const Statement& b) {
    return stmt_text(a) == stmt_text(b);
}

inline std::string canonical_source(const Program& p) {
    std::string out;
    bool first_module = true;
    for (const auto& m : p.modules) {
        if (!first_module) out += '\n';
        first_module = false;
        out += "module " + m.name + " {\n";
        for (const auto& g : m.globals) {
            out += "  var " + g.name + ": ";
            out += type_name(g.type);
            out += " = " + expr_text(g.init) + "\n";
        }
        for (size_t fi = 0; fi < m.functions.size(); ++fi) {
            const auto& f = m.functions[fi];
            if (fi || !m.globals.empty()) out += '\n';
            out += "  ";
            if (f.is_public) out += "public ";
            out += "func " + f.name + "(";
            for (size_t i = 0; i < f.params.size(); ++i) {
                if (i) out += ", ";
                out += f.params[i].name;
                out += ": ";
                out += type_name(f.params[i].type);
            }
            out += ") -> ";
            out += type_name(f.return_type);
            out += " {\n";
            for (const auto& s : f.body) detail::print_stmt_source(s, out, 2);
            out += "  }\n";
        }
        out += "}\n";
    }
    return out;
}

}  // namespace mlrepair
