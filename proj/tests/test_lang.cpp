#include <gtest/gtest.h>

#include "mlrepair/parser.hpp"
#include "mlrepair/printer.hpp"
#include "mlrepair/testsuite.hpp"
#include "mlrepair/validate.hpp"

using namespace mlrepair;

namespace {

const char* kDemo = R"(module demo {
  var scale: int = 3
  var offset: float = -0.5

  public func add(a: int, b: int) -> int {
    return a + b
  }

  public func weighted(a: int, x: float) -> float {
    var acc: float = x * scale
    acc = acc + offset
    return acc
  }

  func helper(n: int) -> int {
    var t: int = 0
    while t < n {
      t = t + 1
    }
    return t
  }

  public func spin(n: int) -> int {
    return helper(n)
  }

  public func div(a: int, b: int) -> int {
    return a / b
  }
}

module extra {
  public func twice(n: int) -> int {
    return demo.add(n, n)
  }

  func hidden(n: int) -> int {
    return n
  }
}
)";

Program demo() { return parse_program(kDemo); }

TEST(Parser, RoundTripIsFixedPoint) {
    Program p = demo();
    std::string printed = canonical_source(p);
    Program p2 = parse_program(printed);
    EXPECT_EQ(printed, canonical_source(p2));
}

TEST(Parser, StatementIdsAssignedInSourceOrder) {
    Program p = demo();
    const auto& helper = p.modules[0].functions[2];
    ASSERT_EQ(helper.name, "helper");
    EXPECT_EQ(helper.body[0].id.str(), "demo:helper:0");
    EXPECT_EQ(helper.body[1].id.str(), "demo:helper:1");
    // while body statement is numbered after its parent
    EXPECT_EQ(helper.body[1].body[0].id.str(), "demo:helper:2");
    EXPECT_EQ(helper.body[2].id.str(), "demo:helper:3");
    int count = 0;
    for_each_statement(p, [&](const Statement& s, const StmtContext&) {
        EXPECT_EQ(s.global_index, count);
        ++count;
    });
    EXPECT_EQ(count, p.statement_count);
}

TEST(Parser, PrecedenceAndParens) {
    EXPECT_EQ(expr_text(parse_expression("a + b * c")), "a + b * c");
    EXPECT_EQ(expr_text(parse_expression("(a + b) * c")), "(a + b) * c");
    EXPECT_EQ(expr_text(parse_expression("a - (b - c)")), "a - (b - c)");
    EXPECT_EQ(expr_text(parse_expression("a - b - c")), "a - b - c");
    EXPECT_EQ(expr_text(parse_expression("(a < b) == ok")), "(a < b) == ok");
    EXPECT_EQ(expr_text(parse_expression("!(a && b) || c")), "!(a && b) || c");
    EXPECT_EQ(expr_text(parse_expression("-(x + 1)")), "-(x + 1)");
    EXPECT_EQ(expr_text(parse_expression("- -x")), "-(-x)");
    EXPECT_EQ(expr_text(parse_expression("m.f(x, y + 1)")), "m.f(x, y + 1)");
}

TEST(Parser, FloatLiteralsPrintShortest) {
    EXPECT_EQ(float_text(1.5), "1.5");
    EXPECT_EQ(float_text(0.1), "0.1");
    EXPECT_EQ(float_text(1.0), "1.0");
    EXPECT_EQ(float_text(-0.5), "-0.5");
    EXPECT_EQ(float_text(1e20), "1e+20");
}

TEST(Parser, SyntaxErrorsCarryPosition) {
    try {
        parse_program("module m {\n  func f() -> int {\n    return 1 +\n  }\n}\n");
        FAIL() << "expected SyntaxError";
    } catch (const SyntaxError& e) {
        EXPECT_EQ(e.line, 4);
    }
    EXPECT_THROW(parse_program(""), SyntaxError);
    EXPECT_THROW(parse_program("module m { func f() -> int { return 1 return 2 } }"),
                 SyntaxError);  // two statements on one line
}

TEST(Parser, InlineTextIsStructuralKey) {
    Program p = demo();
    const auto& helper = p.modules[0].functions[2];
    EXPECT_EQ(stmt_text(helper.body[0]), "var t: int = 0");
    EXPECT_EQ(stmt_text(helper.body[1]), "while t < n { t = t + 1 }");
    Statement copy = helper.body[1];
    copy.id = StatementId{"x", "y", 9};
    EXPECT_TRUE(stmt_equal(copy, helper.body[1]));
}

TEST(Validate, AcceptsDemo) {
    Program p = demo();
    auto err = validate_program(p);
    EXPECT_FALSE(err.has_value()) << err->str();
}

static std::optional<StaticError> check(const std::string& body,
                                        const std::string& ret = "int") {
    std::string src = "module m {\n  public func f(a: int, x: float) -> " + ret + " {\n" + body +
                      "\n  }\n}\n";
    return validate_program(parse_program(src));
}

TEST(Validate, RejectsBrokenPrograms) {
    EXPECT_NE(check("    return y"), std::nullopt);                        // unresolved name
    EXPECT_NE(check("    return x", "int"), std::nullopt);                 // float to int
    EXPECT_NE(check("    break\n    return 1"), std::nullopt);             // break outside loop
    EXPECT_NE(check("    a = 1"), std::nullopt);                           // missing return
    EXPECT_NE(check("    var a: int = 1\n    var a: int = 2\n    return a"),
              std::nullopt);                                               // same-block redecl
    EXPECT_NE(check("    var b: bool = 1\n    return a"), std::nullopt);   // bad init type
    EXPECT_NE(check("    return x % 2.0", "float"), std::nullopt);         // float mod
    EXPECT_NE(check("    if a { return 1 }\n    return 0"), std::nullopt); // int condition
    EXPECT_EQ(check("    if a > 0 { var t: int = 1\n      return t }\n    return 0"),
              std::nullopt);
    EXPECT_EQ(check("    var t: float = a\n    return t", "float"), std::nullopt);  // widening
}

TEST(Validate, ShadowingAllowedAcrossBlocks) {
    auto err = check(
        "    var t: int = 1\n"
        "    if a > 0 {\n"
        "      var t: float = 2.0\n"
        "      x = t\n"
        "    }\n"
        "    return t");
    EXPECT_FALSE(err.has_value()) << err->str();
}

TEST(Validate, CrossModuleVisibility) {
    Program p = demo();
    EXPECT_EQ(validate_program(p), std::nullopt);
    std::string bad = R"(module a {
  public func f() -> int {
    return b.secret()
  }
}
module b {
  func secret() -> int {
    return 1
  }
}
)";
    auto err = validate_program(parse_program(bad));
    ASSERT_TRUE(err.has_value());
    EXPECT_NE(err->message.find("not public"), std::string::npos);
}

TEST(Validate, VoidRules) {
    std::string src = R"(module m {
  func log(n: int) -> void {
    return
  }
  public func f(n: int) -> int {
    log(n)
    return n
  }
}
)";
    EXPECT_EQ(validate_program(parse_program(src)), std::nullopt);
    std::string bad = R"(module m {
  func log(n: int) -> void {
    return
  }
  public func f(n: int) -> int {
    return log(n)
  }
}
)";
    EXPECT_NE(validate_program(parse_program(bad)), std::nullopt);
}

TEST(Interp, ArithmeticAndCalls) {
    Program p = demo();
    Interpreter in(p);
    auto out = in.run("demo", "add", {int64_t{2}, int64_t{3}}, 1000);
    ASSERT_EQ(out.status, RunStatus::Returned);
    EXPECT_EQ(std::get<int64_t>(*out.ret), 5);

    out = in.run("demo", "weighted", {int64_t{2}, 1.5}, 1000);
    ASSERT_EQ(out.status, RunStatus::Returned);
    EXPECT_DOUBLE_EQ(std::get<double>(*out.ret), 1.5 * 3 - 0.5);

    out = in.run("extra", "twice", {int64_t{7}}, 1000);
    ASSERT_EQ(out.status, RunStatus::Returned);
    EXPECT_EQ(std::get<int64_t>(*out.ret), 14);
}

TEST(Interp, IntDivisionSemantics) {
    Program p = parse_program(R"(module m {
  public func q(a: int, b: int) -> int {
    return a / b
  }
  public func r(a: int, b: int) -> int {
    return a % b
  }
}
)");
    Interpreter in(p);
    auto run = [&](const char* f, int64_t a, int64_t b) {
        auto out = in.run("m", f, {a, b}, 1000);
        EXPECT_EQ(out.status, RunStatus::Returned);
        return std::get<int64_t>(*out.ret);
    };
    EXPECT_EQ(run("q", 7, 2), 3);
    EXPECT_EQ(run("q", -7, 2), -3);
    EXPECT_EQ(run("r", 7, -2), 1);
    EXPECT_EQ(run("r", -7, 2), -1);
    auto out = in.run("m", "q", {int64_t{1}, int64_t{0}}, 1000);
    EXPECT_EQ(out.status, RunStatus::Error);
}

TEST(Interp, LoopsAndStepLimit) {
    Program p = demo();
    Interpreter in(p);
    auto out = in.run("demo", "spin", {int64_t{10}}, 100000);
    ASSERT_EQ(out.status, RunStatus::Returned);
    EXPECT_EQ(std::get<int64_t>(*out.ret), 10);

    Program loop = parse_program(R"(module m {
  public func forever() -> int {
    while true {
    }
    return 0
  }
}
)");
    Interpreter in2(loop);
    out = in2.run("m", "forever", {}, 10000);
    EXPECT_EQ(out.status, RunStatus::StepLimit);
    EXPECT_GE(out.steps, 10000);
}

TEST(Interp, CallDepthIsBounded) {
    Program p = parse_program(R"(module m {
  public func down(n: int) -> int {
    if n <= 0 {
      return 0
    }
    return down(n - 1)
  }
}
)");
    Interpreter in(p);
    auto out = in.run("m", "down", {int64_t{50}}, 100000);
    EXPECT_EQ(out.status, RunStatus::Returned);
    out = in.run("m", "down", {int64_t{100000}}, 10000000);
    EXPECT_EQ(out.status, RunStatus::Error);
    EXPECT_NE(out.error.find("depth"), std::string::npos);
}

TEST(Interp, ShortCircuitSkipsErrors) {
    Program p = parse_program(R"(module m {
  func boom() -> bool {
    var x: int = 1 / 0
    return true
  }
  public func safe(flag: bool) -> bool {
    return flag && boom()
  }
}
)");
    Interpreter in(p);
    auto out = in.run("m", "safe", {false}, 1000);
    ASSERT_EQ(out.status, RunStatus::Returned);
    EXPECT_EQ(std::get<bool>(*out.ret), false);
    out = in.run("m", "safe", {true}, 1000);
    EXPECT_EQ(out.status, RunStatus::Error);
}

TEST(Interp, GlobalsResetPerRun) {
    Program p = parse_program(R"(module m {
  var counter: int = 0
  public func bump() -> int {
    counter = counter + 1
    return counter
  }
}
)");
    Interpreter in(p);
    auto out = in.run("m", "bump", {}, 1000);
    EXPECT_EQ(std::get<int64_t>(*out.ret), 1);
    out = in.run("m", "bump", {}, 1000);
    EXPECT_EQ(std::get<int64_t>(*out.ret), 1);
}

TEST(Interp, CoverageMarksExecutedStatementsOnly) {
    Program p = parse_program(R"(module m {
  public func pick(flag: bool) -> int {
    if flag {
      return 1
    } else {
      return 2
    }
  }
}
)");
    Interpreter in(p);
    auto out = in.run("m", "pick", {true}, 1000);
    // statements: if=0, return 1=1, return 2=2
    EXPECT_TRUE(out.covered.test(0));
    EXPECT_TRUE(out.covered.test(1));
    EXPECT_FALSE(out.covered.test(2));
    EXPECT_EQ(out.covered.count(), 2u);
}

TEST(Suite, ParseValidateRun) {
    Program p = demo();
    TestSuite suite = parse_suite(R"(# demo tests
test add_small: demo.add(2, 3) == 5
test add_neg: demo.add(-2, 3) == 1
test weighted: demo.weighted(2, 1.5) == 4.0
test div_zero: demo.div(1, 0) !error
test twice: extra.twice(4) == 8
test wrong: demo.add(1, 1) == 3
)");
    EXPECT_EQ(suite.tests.size(), 6u);
    EXPECT_EQ(validate_suite(p, suite), std::nullopt);
    auto results = run_suite(p, suite, kDefaultStepLimit);
    EXPECT_EQ(results[0].verdict, Verdict::Pass);
    EXPECT_EQ(results[1].verdict, Verdict::Pass);
    EXPECT_EQ(results[2].verdict, Verdict::Pass);
    EXPECT_EQ(results[3].verdict, Verdict::Pass);  // expected error observed
    EXPECT_EQ(results[4].verdict, Verdict::Pass);
    EXPECT_EQ(results[5].verdict, Verdict::Fail);
}

TEST(Suite, ValidationCatchesBadEntries) {
    Program p = demo();
    auto bad1 = parse_suite("test t: demo.helper(1) == 1\n");  // private
    EXPECT_NE(validate_suite(p, bad1), std::nullopt);
    auto bad2 = parse_suite("test t: demo.add(1) == 1\n");  // arity
    EXPECT_NE(validate_suite(p, bad2), std::nullopt);
    auto bad3 = parse_suite("test t: demo.add(1, 2) == \"x\"\n");  // expectation type
    EXPECT_NE(validate_suite(p, bad3), std::nullopt);
    EXPECT_THROW(parse_suite("test t: demo.add(1, 2) == 3\ntest t: demo.add(1, 2) == 3\n"),
                 SuiteError);
}

TEST(Suite, FloatToleranceIsAbsolute) {
    Program p = parse_program(R"(module m {
  public func third() -> float {
    return 1.0 / 3.0
  }
}
)");
    auto close = parse_suite("test t: m.third() == 0.3333333333\n");
    EXPECT_EQ(run_suite(p, close, 1000)[0].verdict, Verdict::Pass);
    auto far = parse_suite("test t: m.third() == 0.3333\n");
    EXPECT_EQ(run_suite(p, far, 1000)[0].verdict, Verdict::Fail);
}

TEST(Suite, ErrorExpectationFailsOnNormalReturn) {
    Program p = demo();
    auto s = parse_suite("test t: demo.add(1, 2) !error\n");
    EXPECT_EQ(run_suite(p, s, 1000)[0].verdict, Verdict::Fail);
}

TEST(Suite, UnexpectedErrorVerdict) {
    Program p = demo();
    auto s = parse_suite("test t: demo.div(1, 0) == 1\n");
    EXPECT_EQ(run_suite(p, s, 1000)[0].verdict, Verdict::RuntimeError);
}

}  // namespace
