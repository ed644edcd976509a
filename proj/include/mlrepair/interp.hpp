#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mlrepair/ast.hpp"
#include "mlrepair/bitset.hpp"
#include "mlrepair/printer.hpp"

namespace mlrepair {

using Value = std::variant<int64_t, double, bool, std::string>;

inline std::string value_text(const Value& v) {
    switch (v.index()) {
        case 0: return std::to_string(std::get<int64_t>(v));
        case 1: return float_text(std::get<double>(v));
        case 2: return std::get<bool>(v) ? "true" : "false";
        default: return escape_str(std::get<std::string>(v));
    }
}

// Equality as the test harness sees it: int widens to float, floats compare
// with an absolute tolerance, other types compare exactly.
inline bool value_matches(const Value& actual, const Value& expected, double tol) {
    bool a_num = actual.index() <= 1, e_num = expected.index() <= 1;
    if (a_num && e_num) {
        if (actual.index() == 0 && expected.index() == 0)
            return std::get<int64_t>(actual) == std::get<int64_t>(expected);
        double a = actual.index() == 0 ? static_cast<double>(std::get<int64_t>(actual))
                                       : std::get<double>(actual);
        double e = expected.index() == 0 ? static_cast<double>(std::get<int64_t>(expected))
                                         : std::get<double>(expected);
        return std::fabs(a - e) <= tol;
    }
    return actual == expected;
}

enum class RunStatus { Returned, Error, StepLimit };

struct RunOutcome {
    RunStatus status = RunStatus::Returned;
    std::optional<Value> ret;  // absent for void functions
    std::string error;
    Bitset covered;
    int64_t steps = 0;
};

class Interpreter {
public:
    static constexpr int kMaxCallDepth = 256;

    explicit Interpreter(const Program& p) : p_(&p) {}

    RunOutcome run(const std::string& module, const std::string& function,
                   const std::vector<Value>& args, int64_t step_limit) {
        covered_ = Bitset(static_cast<size_t>(p_->statement_count));
        steps_ = 0;
        limit_ = step_limit;
        depth_ = 0;
        init_globals();
        RunOutcome out;
        try {
            int mi = module_index_of(*p_, module);
            if (mi < 0) throw ErrorSignal{"unknown module '" + module + "'"};
            const FunctionDef* f = find_function(p_->modules[static_cast<size_t>(mi)], function);
            if (!f) throw ErrorSignal{"unknown function '" + function + "'"};
            out.ret = call(*f, mi, eval_args(args, *f));
            out.status = RunStatus::Returned;
        } catch (const ErrorSignal& e) {
            out.status = RunStatus::Error;
            out.error = e.msg;
        } catch (const LimitSignal&) {
            out.status = RunStatus::StepLimit;
        }
        out.covered = covered_;
        out.steps = steps_;
        return out;
    }

private:
    struct ErrorSignal {
        std::string msg;
    };
    struct LimitSignal {};

    enum class Flow { Normal, Broke, Continued, Returned };

    struct Env {
        std::vector<std::pair<std::string, Value>> vars;
        std::vector<size_t> marks;

        void push_frame() { marks.push_back(vars.size()); }
        void pop_frame() {
            vars.resize(marks.back());
            marks.pop_back();
        }
        Value* resolve(const std::string& name) {
            for (size_t i = vars.size(); i-- > 0;)
                if (vars[i].first == name) return &vars[i].second;
            return nullptr;
        }
    };

    void init_globals() {
        globals_.assign(p_->modules.size(), {});
        for (size_t mi = 0; mi < p_->modules.size(); ++mi)
            for (const auto& g : p_->modules[mi].globals)
                globals_[mi].emplace_back(g.name, widen(literal_value(g.init), g.type));
    }

    static Value literal_value(const Expr& e) {
        switch (e.kind) {
            case ExprKind::IntLit: return e.int_val;
            case ExprKind::FloatLit: return e.float_val;
            case ExprKind::BoolLit: return e.bool_val;
            case ExprKind::StrLit: return e.str_val;
            case ExprKind::Unary: {
                Value inner = literal_value(e.args[0]);
                if (inner.index() == 0) return wrap_neg(std::get<int64_t>(inner));
                return -std::get<double>(inner);
            }
            default: return int64_t{0};
        }
    }

    static Value widen(Value v, ValueType target) {
        if (target == ValueType::Float && v.index() == 0)
            return static_cast<double>(std::get<int64_t>(v));
        return v;
    }

    std::vector<Value> eval_args(const std::vector<Value>& args, const FunctionDef& f) {
        std::vector<Value> out;
        out.reserve(args.size());
        for (size_t i = 0; i < args.size(); ++i) out.push_back(widen(args[i], f.params[i].type));
        return out;
    }

    void tick() {
        if (++steps_ >= limit_) throw LimitSignal{};
    }

    static int64_t wrap_neg(int64_t v) {
        return static_cast<int64_t>(0ull - static_cast<uint64_t>(v));
    }
    static int64_t wrap_add(int64_t a, int64_t b) {
        return static_cast<int64_t>(static_cast<uint64_t>(a) + static_cast<uint64_t>(b));
    }
    static int64_t wrap_sub(int64_t a, int64_t b) {
        return static_cast<int64_t>(static_cast<uint64_t>(a) - static_cast<uint64_t>(b));
    }
    static int64_t wrap_mul(int64_t a, int64_t b) {
        return static_cast<int64_t>(static_cast<uint64_t>(a) * static_cast<uint64_t>(b));
    }

    std::optional<Value> call(const FunctionDef& f, int module_index, std::vector<Value> args) {
        if (++depth_ > kMaxCallDepth) {
            --depth_;
            throw ErrorSignal{"call depth limit exceeded in '" + f.name + "'"};
        }
        Env env;
        env.push_frame();
        for (size_t i = 0; i < f.params.size(); ++i)
            env.vars.emplace_back(f.params[i].name, std::move(args[i]));
        env.push_frame();
        Flow flow = exec_block(f.body, env, module_index);
        --depth_;
        if (flow == Flow::Returned && ret_slot_)
            return widen(*std::exchange(ret_slot_, std::nullopt), f.return_type);
        ret_slot_.reset();
        return std::nullopt;
    }

    Flow exec_block(const std::vector<Statement>& block, Env& env, int mi) {
        for (const auto& s : block) {
            Flow flow = exec_stmt(s, env, mi);
            if (flow != Flow::Normal) return flow;
        }
        return Flow::Normal;
    }

    Flow exec_stmt(const Statement& s, Env& env, int mi) {
        covered_.set(static_cast<size_t>(s.global_index));
        tick();
        switch (s.kind) {
            case StmtKind::VarDecl:
                env.vars.emplace_back(s.name, widen(eval(s.expr(), env, mi), s.decl_type));
                return Flow::Normal;
            case StmtKind::Assign: {
                Value v = eval(s.expr(), env, mi);
                Value* slot = env.resolve(s.name);
                if (!slot) slot = resolve_global(s.name, mi);
                if (!slot) throw ErrorSignal{"unbound variable '" + s.name + "'"};
                *slot = slot->index() == 1 ? widen(std::move(v), ValueType::Float) : std::move(v);
                return Flow::Normal;
            }
            case StmtKind::If: {
                bool cond = std::get<bool>(eval(s.expr(), env, mi));
                env.push_frame();
                Flow flow = Flow::Normal;
                if (cond)
                    flow = exec_block(s.body, env, mi);
                else if (s.has_else)
                    flow = exec_block(s.else_body, env, mi);
                env.pop_frame();
                return flow;
            }
            case StmtKind::While: {
                while (true) {
                    if (!std::get<bool>(eval(s.expr(), env, mi))) break;
                    env.push_frame();
                    Flow flow = exec_block(s.body, env, mi);
                    env.pop_frame();
                    if (flow == Flow::Broke) break;
                    if (flow == Flow::Returned) return flow;
                    tick();  // each completed iteration costs a step
                }
                return Flow::Normal;
            }
            case StmtKind::Return:
                ret_slot_ = s.has_expr() ? std::optional<Value>(eval(s.expr(), env, mi))
                                         : std::nullopt;
                return Flow::Returned;
            case StmtKind::Break: return Flow::Broke;
            case StmtKind::Continue: return Flow::Continued;
            case StmtKind::CallStmt:
                eval(s.expr(), env, mi);
                return Flow::Normal;
        }
        return Flow::Normal;
    }

    Value* resolve_global(const std::string& name, int mi) {
        for (auto& g : globals_[static_cast<size_t>(mi)])
            if (g.first == name) return &g.second;
        return nullptr;
    }

    Value eval(const Expr& e, Env& env, int mi) {
        switch (e.kind) {
            case ExprKind::IntLit: return e.int_val;
            case ExprKind::FloatLit: return e.float_val;
            case ExprKind::BoolLit: return e.bool_val;
            case ExprKind::StrLit: return e.str_val;
            case ExprKind::VarRef: {
                if (Value* v = env.resolve(e.name)) return *v;
                if (Value* v = resolve_global(e.name, mi)) return *v;
                throw ErrorSignal{"unbound variable '" + e.name + "'"};
            }
            case ExprKind::Unary: {
                Value v = eval(e.args[0], env, mi);
                if (e.uop == UnaryOp::Not) return !std::get<bool>(v);
                if (v.index() == 0) return wrap_neg(std::get<int64_t>(v));
                return -std::get<double>(v);
            }
            case ExprKind::Binary: return eval_binary(e, env, mi);
            case ExprKind::Call: {
                int target = e.target_module.empty() ? mi : module_index_of(*p_, e.target_module);
                if (target < 0) throw ErrorSignal{"unknown module '" + e.target_module + "'"};
                const FunctionDef* f =
                    find_function(p_->modules[static_cast<size_t>(target)], e.name);
                if (!f) throw ErrorSignal{"unknown function '" + e.name + "'"};
                std::vector<Value> args;
                args.reserve(e.args.size());
                for (size_t i = 0; i < e.args.size(); ++i)
                    args.push_back(widen(eval(e.args[i], env, mi), f->params[i].type));
                auto r = call(*f, target, std::move(args));
                return r ? *r : Value{int64_t{0}};
            }
        }
        return int64_t{0};
    }

    Value eval_binary(const Expr& e, Env& env, int mi) {
        if (e.bop == BinaryOp::And) {
            if (!std::get<bool>(eval(e.args[0], env, mi))) return false;
            return std::get<bool>(eval(e.args[1], env, mi));
        }
        if (e.bop == BinaryOp::Or) {
            if (std::get<bool>(eval(e.args[0], env, mi))) return true;
            return std::get<bool>(eval(e.args[1], env, mi));
        }
        Value l = eval(e.args[0], env, mi);
        Value r = eval(e.args[1], env, mi);
        if (l.index() == 3 || r.index() == 3) {  // strings
            if (e.bop == BinaryOp::Add)
                return std::get<std::string>(l) + std::get<std::string>(r);
            bool eq = std::get<std::string>(l) == std::get<std::string>(r);
            return e.bop == BinaryOp::Eq ? eq : !eq;
        }
        if (l.index() == 2 || r.index() == 2) {  // bools
            bool eq = std::get<bool>(l) == std::get<bool>(r);
            return e.bop == BinaryOp::Eq ? eq : !eq;
        }
        if (l.index() == 1 || r.index() == 1) return eval_float(e.bop, as_f(l), as_f(r));
        return eval_int(e.bop, std::get<int64_t>(l), std::get<int64_t>(r));
    }

    static double as_f(const Value& v) {
        return v.index() == 0 ? static_cast<double>(std::get<int64_t>(v)) : std::get<double>(v);
    }

    Value eval_int(BinaryOp op, int64_t a, int64_t b) {
        switch (op) {
            case BinaryOp::Add: return wrap_add(a, b);
            case BinaryOp::Sub: return wrap_sub(a, b);
            case BinaryOp::Mul: return wrap_mul(a, b);
            case BinaryOp::Div:
                if (b == 0) throw ErrorSignal{"division by zero"};
                if (a == INT64_MIN && b == -1) return INT64_MIN;
                return a / b;
            case BinaryOp::Mod:
                if (b == 0) throw ErrorSignal{"modulo by zero"};
                if (a == INT64_MIN && b == -1) return int64_t{0};
                return a % b;
            case BinaryOp::Eq: return a == b;
            case BinaryOp::Ne: return a != b;
            case BinaryOp::Lt: return a < b;
            case BinaryOp::Le: return a <= b;
            case BinaryOp::Gt: return a > b;
            case BinaryOp::Ge: return a >= b;
            default: return int64_t{0};
        }
    }

    static Value eval_float(BinaryOp op, double a, double b) {
        switch (op) {
            case BinaryOp::Add: return a + b;
            case BinaryOp::Sub: return a - b;
            case BinaryOp::Mul: return a * b;
            case BinaryOp::Div: return a / b;  // IEEE semantics, no error
            case BinaryOp::Eq: return a == b;
            case BinaryOp::Ne: return a != b;
            case BinaryOp::Lt: return a < b;
            case BinaryOp::Le: return a <= b;
            case BinaryOp::Gt: return a > b;
            case BinaryOp::Ge: return a >= b;
            default: return 0.0;
        }
    }

    const Program* p_;
    std::vector<std::vector<std::pair<std::string, Value>>> globals_;
    Bitset covered_;
    int64_t steps_ = 0;
    int64_t limit_ = 0;
    int depth_ = 0;
    std::optional<Value> ret_slot_;
};

}  // namespace mlrepair
