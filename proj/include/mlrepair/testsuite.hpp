#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlrepair/interp.hpp"
#include "mlrepair/parser.hpp"
#include "mlrepair/validate.hpp"

namespace mlrepair {

// One entry of a .mlt suite file:
//   test <name>: <module>.<function>(<literal args>) == <literal>
//   test <name>: <module>.<function>(<literal args>) !error
struct TestCase {
    std::string name;
    std::string module;
    std::string function;
    std::vector<Value> args;
    bool expect_error = false;
    Value expected;
};

struct TestSuite {
    std::vector<TestCase> tests;
};

struct SuiteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline Value token_literal(Lexer& lex) {
    bool neg = false;
    if (lex.peek().kind == Tok::Op && lex.peek().text == "-") {
        lex.take();
        neg = true;
    }
    Token t = lex.take();
    switch (t.kind) {
        case Tok::Int:
            return neg ? -t.int_val : t.int_val;
        case Tok::Float:
            return neg ? -t.float_val : t.float_val;
        case Tok::Str:
            if (neg) throw SuiteError("line " + std::to_string(t.line) + ": cannot negate a string");
            return t.text;
        case Tok::Ident:
            if (t.text == "true" || t.text == "false") {
                if (neg)
                    throw SuiteError("line " + std::to_string(t.line) + ": cannot negate a bool");
                return t.text == "true";
            }
            [[fallthrough]];
        default:
            throw SuiteError("line " + std::to_string(t.line) + ": expected a literal");
    }
}

}  // namespace detail

inline TestSuite parse_suite(std::string_view source) {
    detail::Lexer lex(source);
    TestSuite suite;
    auto expect = [&](detail::Tok kind, std::string_view text, const char* what) {
        const detail::Token& t = lex.peek();
        if (t.kind != kind || (!text.empty() && t.text != text))
            throw SuiteError("line " + std::to_string(t.line) + ": expected " + what);
        return lex.take();
    };
    while (lex.peek().kind != detail::Tok::End) {
        expect(detail::Tok::Ident, "test", "'test'");
        TestCase tc;
        tc.name = expect(detail::Tok::Ident, "", "test name").text;
        expect(detail::Tok::Punct, ":", "':'");
        tc.module = expect(detail::Tok::Ident, "", "module name").text;
        expect(detail::Tok::Punct, ".", "'.'");
        tc.function = expect(detail::Tok::Ident, "", "function name").text;
        expect(detail::Tok::Punct, "(", "'('");
        if (!(lex.peek().kind == detail::Tok::Punct && lex.peek().text == ")")) {
            while (true) {
                tc.args.push_back(detail::token_literal(lex));
                if (lex.peek().kind == detail::Tok::Punct && lex.peek().text == ",") {
                    lex.take();
                    continue;
                }
                break;
            }
        }
        expect(detail::Tok::Punct, ")", "')'");
        const detail::Token& t = lex.peek();
        if (t.kind == detail::Tok::Op && t.text == "==") {
            lex.take();
            tc.expected = detail::token_literal(lex);
        } else if (t.kind == detail::Tok::Op && t.text == "!") {
            lex.take();
            expect(detail::Tok::Ident, "error", "'error'");
            tc.expect_error = true;
        } else {
            throw SuiteError("line " + std::to_string(t.line) + ": expected '==' or '!error'");
        }
        for (const auto& prev : suite.tests)
            if (prev.name == tc.name)
                throw SuiteError("duplicate test name '" + tc.name + "'");
        suite.tests.push_back(std::move(tc));
    }
    if (suite.tests.empty()) throw SuiteError("suite contains no tests");
    return suite;
}

inline ValueType value_type_of(const Value& v) {
    switch (v.index()) {
        case 0: return ValueType::Int;
        case 1: return ValueType::Float;
        case 2: return ValueType::Bool;
        default: return ValueType::Str;
    }
}

// Entry functions must exist, be public, and match the call shape; checked
// once against the original program (patches never change signatures).
inline std::optional<StaticError> validate_suite(const Program& p, const TestSuite& suite) {
    FuncTable table = FuncTable::build(p);
    for (const auto& tc : suite.tests) {
        const FuncInfo* fi = table.find(tc.module, tc.function);
        std::string where = "test " + tc.name;
        if (!fi)
            return StaticError{"unknown function '" + tc.module + "." + tc.function + "'", where};
        if (!fi->sig.is_public)
            return StaticError{"function '" + tc.module + "." + tc.function + "' is not public",
                               where};
        if (tc.args.size() != fi->sig.params.size())
            return StaticError{"expected " + std::to_string(fi->sig.params.size()) +
                                   " arguments, got " + std::to_string(tc.args.size()),
                               where};
        for (size_t i = 0; i < tc.args.size(); ++i)
            if (!assignable(value_type_of(tc.args[i]), fi->sig.params[i]))
                return StaticError{"argument " + std::to_string(i + 1) + " has type " +
                                       type_name(value_type_of(tc.args[i])) + ", expected " +
                                       type_name(fi->sig.params[i]),
                                   where};
        if (!tc.expect_error) {
            if (fi->sig.ret == ValueType::Void)
                return StaticError{"cannot assert a value of a void function", where};
            ValueType et = value_type_of(tc.expected);
            bool numeric_pair = (et == ValueType::Int || et == ValueType::Float) &&
                                (fi->sig.ret == ValueType::Int || fi->sig.ret == ValueType::Float);
            if (!numeric_pair && et != fi->sig.ret)
                return StaticError{"expected literal has type " + std::string(type_name(et)) +
                                       ", function returns " + type_name(fi->sig.ret),
                                   where};
        }
    }
    return std::nullopt;
}

enum class Verdict { Pass, Fail, RuntimeError, StepLimitExceeded };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::RuntimeError: return "runtime_error";
        case Verdict::StepLimitExceeded: return "step_limit";
    }
    return "?";
}

struct TestResult {
    Verdict verdict = Verdict::Fail;
    Bitset covered;
    int64_t steps = 0;
    std::string detail;
};

constexpr double kFloatTestTolerance = 1e-9;
constexpr int64_t kDefaultStepLimit = 100000;

inline TestResult execute_test(const Program& p, const TestCase& tc, int64_t step_limit) {
    Interpreter interp(p);
    RunOutcome out = interp.run(tc.module, tc.function, tc.args, step_limit);
    TestResult r;
    r.covered = std::move(out.covered);
    r.steps = out.steps;
    switch (out.status) {
        case RunStatus::StepLimit:
            r.verdict = Verdict::StepLimitExceeded;
            break;
        case RunStatus::Error:
            r.verdict = tc.expect_error ? Verdict::Pass : Verdict::RuntimeError;
            r.detail = out.error;
            break;
        case RunStatus::Returned:
            if (tc.expect_error) {
                r.verdict = Verdict::Fail;
                r.detail = "expected a runtime error";
            } else if (out.ret && value_matches(*out.ret, tc.expected, kFloatTestTolerance)) {
                r.verdict = Verdict::Pass;
            } else {
                r.verdict = Verdict::Fail;
                r.detail = out.ret ? "returned " + value_text(*out.ret) : "no return value";
            }
            break;
    }
    return r;
}

inline std::vector<TestResult> run_suite(const Program& p, const TestSuite& suite,
                                         int64_t step_limit) {
    std::vector<TestResult> out;
    out.reserve(suite.tests.size());
    for (const auto& tc : suite.tests) out.push_back(execute_test(p, tc, step_limit));
    return out;
}

}  // namespace mlrepair
