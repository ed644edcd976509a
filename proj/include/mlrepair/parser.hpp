#pragma once

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mlrepair/ast.hpp"

namespace mlrepair {

struct SyntaxError : std::runtime_error {
    int line;
    int col;
    SyntaxError(int line_, int col_, const std::string& msg)
        : std::runtime_error("syntax error at " + std::to_string(line_) + ":" +
                             std::to_string(col_) + ": " + msg),
          line(line_),
          col(col_) {}
};

namespace detail {

enum class Tok {
    Ident,
    Int,
    Float,
    Str,
    Punct,  // ( ) { } , : . =
    Op,     // == != <= >= < > + - * / % && || !
    Arrow,  // ->
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int64_t int_val = 0;
    double float_val = 0.0;
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_space_and_comments();
        tok_ = Token{};
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= src_.size()) {
            tok_.kind = Tok::End;
            return;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                          src_[pos_] == '_'))
                bump();
            tok_.kind = Tok::Ident;
            tok_.text.assign(src_.substr(start, pos_ - start));
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            lex_number();
            return;
        }
        if (c == '"') {
            lex_string();
            return;
        }
        lex_operator();
    }

    void skip_space_and_comments() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') bump();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                bump();
            } else {
                break;
            }
        }
    }

    void lex_number() {
        size_t start = pos_;
        bool is_float = false;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
        if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
            std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
            is_float = true;
            bump();
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            size_t save = pos_;
            bump();
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) bump();
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                is_float = true;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    bump();
            } else {
                pos_ = save;  // not an exponent, e.g. identifier follows
            }
        }
        std::string_view text = src_.substr(start, pos_ - start);
        tok_.text.assign(text);
        if (is_float) {
            tok_.kind = Tok::Float;
            tok_.float_val = std::strtod(tok_.text.c_str(), nullptr);
        } else {
            tok_.kind = Tok::Int;
            auto res = std::from_chars(text.data(), text.data() + text.size(), tok_.int_val);
            if (res.ec != std::errc{})
                throw SyntaxError(tok_.line, tok_.col, "integer literal out of range");
        }
    }

    void lex_string() {
        bump();  // opening quote
        std::string value;
        while (true) {
            if (pos_ >= src_.size() || src_[pos_] == '\n')
                throw SyntaxError(tok_.line, tok_.col, "unterminated string literal");
            char c = src_[pos_];
            bump();
            if (c == '"') break;
            if (c == '\\') {
                if (pos_ >= src_.size())
                    throw SyntaxError(tok_.line, tok_.col, "unterminated string literal");
                char esc = src_[pos_];
                bump();
                switch (esc) {
                    case 'n': value += '\n'; break;
                    case 't': value += '\t'; break;
                    case '"': value += '"'; break;
                    case '\\': value += '\\'; break;
                    default:
                        throw SyntaxError(line_, col_ - 1, "unknown escape sequence");
                }
            } else {
                value += c;
            }
        }
        tok_.kind = Tok::Str;
        tok_.text = std::move(value);
    }

    void lex_operator() {
        auto two = src_.substr(pos_, 2);
        if (two == "->") {
            tok_.kind = Tok::Arrow;
            tok_.text = "->";
            bump();
            bump();
            return;
        }
        if (two == "==" || two == "!=" || two == "<=" || two == ">=" || two == "&&" ||
            two == "||") {
            tok_.kind = Tok::Op;
            tok_.text.assign(two);
            bump();
            bump();
            return;
        }
        char c = src_[pos_];
        if (std::string_view("()},{:.=").find(c) != std::string_view::npos ||
            c == ',') {
            // '=' doubles as assignment punctuation.
            tok_.kind = Tok::Punct;
            tok_.text = std::string(1, c);
            bump();
            return;
        }
        if (std::string_view("+-*/%<>!").find(c) != std::string_view::npos) {
            tok_.kind = Tok::Op;
            tok_.text = std::string(1, c);
            bump();
            return;
        }
        throw SyntaxError(line_, col_, std::string("unexpected character '") + c + "'");
    }

    void bump() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token tok_;
};

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) {}

    Program parse_program() {
        Program p;
        while (peek().kind != Tok::End) {
            expect_ident("module");
            SourceModule m;
            m.name = take_name("module name");
            expect_punct("{");
            while (!at_punct("}")) {
                if (at_ident("var"))
                    m.globals.push_back(parse_global());
                else
                    m.functions.push_back(parse_function());
            }
            expect_punct("}");
            p.modules.push_back(std::move(m));
        }
        if (p.modules.empty()) fail("expected at least one module");
        finalize(p);
        return p;
    }

    // A statement list without the surrounding braces, for fixtures.
    std::vector<Statement> parse_statements() {
        std::vector<Statement> out;
        while (peek().kind != Tok::End) out.push_back(parse_statement());
        return out;
    }

    Expr parse_expression_only() {
        Expr e = parse_expr();
        if (peek().kind != Tok::End) fail("trailing input after expression");
        return e;
    }

private:
    const Token& peek() const { return lex_.peek(); }

    [[noreturn]] void fail(const std::string& msg) const {
        throw SyntaxError(peek().line, peek().col, msg);
    }

    bool at_punct(std::string_view p) const {
        return peek().kind == Tok::Punct && peek().text == p;
    }
    bool at_op(std::string_view p) const { return peek().kind == Tok::Op && peek().text == p; }
    bool at_ident(std::string_view name) const {
        return peek().kind == Tok::Ident && peek().text == name;
    }

    void expect_punct(std::string_view p) {
        if (!at_punct(p)) fail("expected '" + std::string(p) + "'");
        lex_.take();
    }

    void expect_ident(std::string_view name) {
        if (!at_ident(name)) fail("expected '" + std::string(name) + "'");
        lex_.take();
    }

    std::string take_name(const std::string& what) {
        if (peek().kind != Tok::Ident) fail("expected " + what);
        std::string n = lex_.take().text;
        if (is_keyword(n)) fail("'" + n + "' is a keyword; expected " + what);
        return n;
    }

    static bool is_keyword(const std::string& s) {
        static const char* kw[] = {"module", "public", "func",  "var",   "if",   "else",
                                   "while",  "return", "break", "continue", "true", "false",
                                   "int",    "float",  "bool",  "str",   "void"};
        for (auto* k : kw)
            if (s == k) return true;
        return false;
    }

    ValueType parse_type(bool allow_void) {
        if (peek().kind != Tok::Ident) fail("expected type name");
        Token t = lex_.take();
        if (t.text == "int") return ValueType::Int;
        if (t.text == "float") return ValueType::Float;
        if (t.text == "bool") return ValueType::Bool;
        if (t.text == "str") return ValueType::Str;
        if (t.text == "void") {
            if (!allow_void) throw SyntaxError(t.line, t.col, "'void' is not allowed here");
            return ValueType::Void;
        }
        throw SyntaxError(t.line, t.col, "unknown type '" + t.text + "'");
    }

    GlobalDecl parse_global() {
        expect_ident("var");
        GlobalDecl g;
        g.name = take_name("variable name");
        expect_punct(":");
        g.type = parse_type(false);
        expect_punct("=");
        g.init = parse_literal();
        return g;
    }

    Expr parse_literal() {
        bool neg = false;
        if (at_op("-")) {
            lex_.take();
            neg = true;
        }
        Token t = lex_.take();
        Expr e;
        switch (t.kind) {
            case Tok::Int: e = Expr::int_lit(t.int_val); break;
            case Tok::Float: e = Expr::float_lit(t.float_val); break;
            case Tok::Str:
                if (neg) throw SyntaxError(t.line, t.col, "cannot negate a string literal");
                e = Expr::str_lit(t.text);
                break;
            case Tok::Ident:
                if (t.text == "true" || t.text == "false") {
                    if (neg) throw SyntaxError(t.line, t.col, "cannot negate a bool literal");
                    e = Expr::bool_lit(t.text == "true");
                    break;
                }
                [[fallthrough]];
            default:
                throw SyntaxError(t.line, t.col, "global initializer must be a literal");
        }
        if (neg) e = Expr::unary(UnaryOp::Neg, std::move(e));
        return e;
    }

    FunctionDef parse_function() {
        FunctionDef f;
        if (at_ident("public")) {
            lex_.take();
            f.is_public = true;
        }
        expect_ident("func");
        f.name = take_name("function name");
        expect_punct("(");
        if (!at_punct(")")) {
            while (true) {
                Param prm;
                prm.name = take_name("parameter name");
                expect_punct(":");
                prm.type = parse_type(false);
                f.params.push_back(std::move(prm));
                if (at_punct(",")) {
                    lex_.take();
                    continue;
                }
                break;
            }
        }
        expect_punct(")");
        if (peek().kind != Tok::Arrow) fail("expected '->'");
        lex_.take();
        f.return_type = parse_type(true);
        f.body = parse_block();
        return f;
    }

    std::vector<Statement> parse_block() {
        expect_punct("{");
        std::vector<Statement> block;
        while (!at_punct("}")) block.push_back(parse_statement());
        expect_punct("}");
        return block;
    }

    Statement parse_statement() {
        if (peek().kind != Tok::Ident) fail("expected statement");
        Statement s;
        const std::string& head = peek().text;
        if (head == "var") {
            lex_.take();
            s.kind = StmtKind::VarDecl;
            s.name = take_name("variable name");
            expect_punct(":");
            s.decl_type = parse_type(false);
            expect_punct("=");
            int line = peek().line;
            s.exprs.push_back(parse_expr());
            end_statement(line);
        } else if (head == "if") {
            lex_.take();
            s.kind = StmtKind::If;
            s.exprs.push_back(parse_expr());
            s.body = parse_block();
            if (at_ident("else")) {
                lex_.take();
                s.has_else = true;
                s.else_body = parse_block();
            }
        } else if (head == "while") {
            lex_.take();
            s.kind = StmtKind::While;
            s.exprs.push_back(parse_expr());
            s.body = parse_block();
        } else if (head == "return") {
            Token ret = lex_.take();
            s.kind = StmtKind::Return;
            // A value is present only on the same line: statements end at
            // newlines, which the token stream preserves via line numbers.
            if (!at_punct("}") && peek().kind != Tok::End && peek().line == ret.line) {
                s.exprs.push_back(parse_expr());
                end_statement(ret.line);
            }
        } else if (head == "break") {
            Token t = lex_.take();
            s.kind = StmtKind::Break;
            end_statement(t.line);
        } else if (head == "continue") {
            Token t = lex_.take();
            s.kind = StmtKind::Continue;
            end_statement(t.line);
        } else if (head == "else" || head == "func" || head == "public" || head == "module") {
            fail("unexpected '" + head + "'");
        } else {
            // assignment or a call statement
            Token name = lex_.take();
            if (is_keyword(name.text))
                throw SyntaxError(name.line, name.col, "unexpected '" + name.text + "'");
            if (at_punct("=")) {
                lex_.take();
                s.kind = StmtKind::Assign;
                s.name = name.text;
                s.exprs.push_back(parse_expr());
                end_statement(name.line);
            } else if (at_punct("(") || at_punct(".")) {
                s.kind = StmtKind::CallStmt;
                s.exprs.push_back(parse_call_from(name));
                end_statement(name.line);
            } else {
                throw SyntaxError(name.line, name.col, "expected '=' or '(' after identifier");
            }
        }
        return s;
    }

    // Canonical form keeps one statement per line; enforcing it here keeps the
    // grammar newline-insensitive everywhere else.
    void end_statement(int line) {
        const Token& t = peek();
        if (t.kind == Tok::End) return;
        if (t.kind == Tok::Punct && t.text == "}") return;
        if (t.line == line) throw SyntaxError(t.line, t.col, "expected end of statement");
    }

    Expr parse_call_from(const Token& first) {
        Expr call;
        call.kind = ExprKind::Call;
        call.name = first.text;
        if (at_punct(".")) {
            lex_.take();
            call.target_module = first.text;
            call.name = take_name("function name");
        }
        expect_punct("(");
        if (!at_punct(")")) {
            while (true) {
                call.args.push_back(parse_expr());
                if (at_punct(",")) {
                    lex_.take();
                    continue;
                }
                break;
            }
        }
        expect_punct(")");
        return call;
    }

    Expr parse_expr() { return parse_or(); }

    Expr parse_or() {
        Expr e = parse_and();
        while (at_op("||")) {
            lex_.take();
            e = Expr::binary(BinaryOp::Or, std::move(e), parse_and());
        }
        return e;
    }

    Expr parse_and() {
        Expr e = parse_cmp();
        while (at_op("&&")) {
            lex_.take();
            e = Expr::binary(BinaryOp::And, std::move(e), parse_cmp());
        }
        return e;
    }

    Expr parse_cmp() {
        Expr e = parse_add();
        BinaryOp op;
        if (at_op("==")) op = BinaryOp::Eq;
        else if (at_op("!=")) op = BinaryOp::Ne;
        else if (at_op("<")) op = BinaryOp::Lt;
        else if (at_op("<=")) op = BinaryOp::Le;
        else if (at_op(">")) op = BinaryOp::Gt;
        else if (at_op(">=")) op = BinaryOp::Ge;
        else return e;
        lex_.take();
        return Expr::binary(op, std::move(e), parse_add());
    }

    Expr parse_add() {
        Expr e = parse_mul();
        while (at_op("+") || at_op("-")) {
            BinaryOp op = peek().text == "+" ? BinaryOp::Add : BinaryOp::Sub;
            lex_.take();
            e = Expr::binary(op, std::move(e), parse_mul());
        }
        return e;
    }

    Expr parse_mul() {
        Expr e = parse_unary();
        while (at_op("*") || at_op("/") || at_op("%")) {
            BinaryOp op = peek().text == "*"   ? BinaryOp::Mul
                          : peek().text == "/" ? BinaryOp::Div
                                               : BinaryOp::Mod;
            lex_.take();
            e = Expr::binary(op, std::move(e), parse_unary());
        }
        return e;
    }

    Expr parse_unary() {
        if (at_op("-")) {
            lex_.take();
            return Expr::unary(UnaryOp::Neg, parse_unary());
        }
        if (at_op("!")) {
            lex_.take();
            return Expr::unary(UnaryOp::Not, parse_unary());
        }
        return parse_primary();
    }

    Expr parse_primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Int: return Expr::int_lit(lex_.take().int_val);
            case Tok::Float: return Expr::float_lit(lex_.take().float_val);
            case Tok::Str: return Expr::str_lit(lex_.take().text);
            case Tok::Punct:
                if (t.text == "(") {
                    lex_.take();
                    Expr e = parse_expr();
                    expect_punct(")");
                    return e;
                }
                fail("expected expression");
            case Tok::Ident: {
                if (t.text == "true" || t.text == "false")
                    return Expr::bool_lit(lex_.take().text == "true");
                Token name = lex_.take();
                if (is_keyword(name.text))
                    throw SyntaxError(name.line, name.col,
                                      "unexpected keyword '" + name.text + "' in expression");
                if (at_punct("(") || at_punct(".")) return parse_call_from(name);
                return Expr::var(name.text);
            }
            default: fail("expected expression");
        }
    }

    Lexer lex_;
};

}  // namespace detail

inline Program parse_program(std::string_view source) {
    detail::Parser p(source);
    return p.parse_program();
}

inline std::vector<Statement> parse_statements(std::string_view source) {
    detail::Parser p(source);
    return p.parse_statements();
}

inline Expr parse_expression(std::string_view source) {
    detail::Parser p(source);
    return p.parse_expression_only();
}

}  // namespace mlrepair
