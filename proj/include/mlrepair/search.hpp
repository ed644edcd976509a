#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mlrepair/config.hpp"
#include "mlrepair/filtering.hpp"
#include "mlrepair/genome.hpp"

namespace mlrepair {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Search-level fitness. f1 counts effective edits, f2 blends the failing
// fractions of the negative and retained positive tests. A patch that decodes
// to nothing, fails static validation, or trips the step limit carries no
// usable objective values at all.
struct Objectives {
    double f1 = 0.0;
    double f2 = 0.0;
    bool valid = false;
};

inline bool dominates(const Objectives& a, const Objectives& b) {
    if (!a.valid) return false;
    if (!b.valid) return true;
    return a.f1 <= b.f1 && a.f2 <= b.f2 && (a.f1 < b.f1 || a.f2 < b.f2);
}

inline std::vector<std::vector<int>> fast_nondominated_sort(const std::vector<Objectives>& pop) {
    int n = static_cast<int>(pop.size());
    if (n == 0) return {};
    std::vector<std::vector<int>> beats(static_cast<size_t>(n));
    std::vector<int> beaten_by(static_cast<size_t>(n), 0);
    std::vector<std::vector<int>> fronts(1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (dominates(pop[static_cast<size_t>(i)], pop[static_cast<size_t>(j)]))
                beats[static_cast<size_t>(i)].push_back(j);
            else if (dominates(pop[static_cast<size_t>(j)], pop[static_cast<size_t>(i)]))
                ++beaten_by[static_cast<size_t>(i)];
        }
        if (beaten_by[static_cast<size_t>(i)] == 0) fronts[0].push_back(i);
    }
    size_t fi = 0;
    while (fi < fronts.size()) {
        std::vector<int> next;
        for (int i : fronts[fi])
            for (int j : beats[static_cast<size_t>(i)])
                if (--beaten_by[static_cast<size_t>(j)] == 0) next.push_back(j);
        ++fi;
        if (!next.empty()) fronts.push_back(std::move(next));
    }
    for (auto& f : fronts) std::sort(f.begin(), f.end());
    return fronts;
}

namespace detail {

inline double objective_component(const Objectives& o, int which) {
    if (!o.valid) return kInf;
    return which == 0 ? o.f1 : o.f2;
}

}  // namespace detail

// Crowding distance within one front, normalized per objective by the front's
// own value range. Boundary solutions are marked infinite.
inline std::vector<double> crowding_distance(const std::vector<Objectives>& front) {
    size_t k = front.size();
    std::vector<double> d(k, 0.0);
    if (k == 0) return d;
    if (k <= 2) {
        std::fill(d.begin(), d.end(), kInf);
        return d;
    }
    std::vector<size_t> idx(k);
    for (int which = 0; which < 2; ++which) {
        std::iota(idx.begin(), idx.end(), size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
            return detail::objective_component(front[a], which) <
                   detail::objective_component(front[b], which);
        });
        d[idx.front()] = kInf;
        d[idx.back()] = kInf;
        double range = detail::objective_component(front[idx.back()], which) -
                       detail::objective_component(front[idx.front()], which);
        if (!(range > 0.0) || range == kInf) continue;
        for (size_t t = 1; t + 1 < k; ++t) {
            if (d[idx[t]] == kInf) continue;
            d[idx[t]] += (detail::objective_component(front[idx[t + 1]], which) -
                          detail::objective_component(front[idx[t - 1]], which)) /
                         range;
        }
    }
    return d;
}

// Binary tournament with replacement: lower rank wins, then larger crowding,
// then a fair coin.
inline int tournament_pick(const std::vector<int>& rank, const std::vector<double>& crowd,
                           Rng& rng) {
    int a = static_cast<int>(rng.uniform_index(rank.size()));
    int b = static_cast<int>(rng.uniform_index(rank.size()));
    if (rank[static_cast<size_t>(a)] != rank[static_cast<size_t>(b)])
        return rank[static_cast<size_t>(a)] < rank[static_cast<size_t>(b)] ? a : b;
    if (crowd[static_cast<size_t>(a)] != crowd[static_cast<size_t>(b)])
        return crowd[static_cast<size_t>(a)] > crowd[static_cast<size_t>(b)] ? a : b;
    return rng.bernoulli(0.5) ? a : b;
}

// Everything one repair run needs, prepared once. The deletion baseline skips
// seed collection and modification points; it edits candidates directly.
struct RepairContext {
    const Program* program = nullptr;
    const TestSuite* suite = nullptr;
    SearchConfig cfg;
    FuncTable table;
    CoverageMatrix coverage;
    std::vector<SuspiciousStatement> ranked;      // every statement, for reporting
    std::vector<SuspiciousStatement> candidates;  // thresholded, falling suspiciousness
    std::vector<SeedStatement> seeds;
    std::vector<ModificationPoint> points;
    TestPartition partition;
    Rng rng{1};
    int64_t evaluations = 0;
};

inline RepairContext prepare_repair(const Program& p, const TestSuite& suite, SearchConfig cfg) {
    if (auto err = validate_program(p)) throw PipelineError("InvalidProgram", err->str());
    if (auto err = validate_suite(p, suite)) throw PipelineError("InvalidSuite", err->str());
    RepairContext ctx;
    ctx.program = &p;
    ctx.suite = &suite;
    ctx.table = FuncTable::build(p);
    ctx.coverage = collect_coverage(p, suite, cfg.step_limit);
    ctx.ranked = ochiai_suspiciousness(ctx.coverage, p);
    ctx.candidates = select_candidates(ctx.ranked, cfg.gamma_min, cfg.n_max);
    ctx.partition = filter_positive_tests(ctx.coverage, ctx.candidates);
    if (cfg.variant != Variant::Kali) {
        ctx.seeds = collect_seed_statements(ctx.coverage, p);
        ctx.points = build_modification_points(p, ctx.table, ctx.candidates, ctx.seeds, cfg.mode,
                                               screening_for(cfg.variant), cfg.rules);
        if (cfg.p_m <= 0.0) cfg.p_m = 1.0 / static_cast<double>(ctx.points.size());
    }
    ctx.cfg = cfg;
    ctx.rng = Rng(cfg.rng_seed);
    return ctx;
}

// Fitness of a concrete edit list. Counts as one evaluation no matter how it
// exits. When a sample of the retained positive tests comes up clean, the
// full retained set is rechecked before f2 may be reported as zero.
inline Objectives evaluate_edits(const std::vector<Edit>& edits, RepairContext& ctx) {
    ++ctx.evaluations;
    Objectives o;
    o.f1 = static_cast<double>(edits.size());
    if (edits.empty()) return o;
    Program patched = apply_edits(*ctx.program, edits);
    if (validate_program(patched)) return o;

    int fail_neg = 0;
    for (int t : ctx.partition.t_f) {
        TestResult r = execute_test(patched, ctx.suite->tests[static_cast<size_t>(t)],
                                    ctx.cfg.step_limit);
        if (r.verdict == Verdict::StepLimitExceeded) return o;
        if (r.verdict != Verdict::Pass) ++fail_neg;
    }
    double neg_frac = ctx.partition.t_f.empty()
                          ? 0.0
                          : static_cast<double>(fail_neg) / ctx.partition.t_f.size();

    bool limit_hit = false;
    auto failing_fraction = [&](const std::vector<int>& tests) {
        if (tests.empty()) return 0.0;
        int fails = 0;
        for (int t : tests) {
            TestResult r = execute_test(patched, ctx.suite->tests[static_cast<size_t>(t)],
                                        ctx.cfg.step_limit);
            if (r.verdict == Verdict::StepLimitExceeded) {
                limit_hit = true;
                return 0.0;
            }
            if (r.verdict != Verdict::Pass) ++fails;
        }
        return static_cast<double>(fails) / tests.size();
    };

    const std::vector<int>& full = ctx.partition.t_c;
    bool sampled =
        ctx.cfg.sample_size > 0 && static_cast<size_t>(ctx.cfg.sample_size) < full.size();
    double pos_frac;
    if (sampled) {
        std::vector<int> pool = full;  // fresh draw without replacement each evaluation
        size_t want = static_cast<size_t>(ctx.cfg.sample_size);
        for (size_t i = 0; i < want; ++i) {
            size_t j = i + ctx.rng.uniform_index(pool.size() - i);
            std::swap(pool[i], pool[j]);
        }
        pool.resize(want);
        pos_frac = failing_fraction(pool);
        if (limit_hit) return o;
        if (neg_frac == 0.0 && pos_frac == 0.0) {
            pos_frac = failing_fraction(full);
            if (limit_hit) return o;
        }
    } else {
        pos_frac = failing_fraction(full);
        if (limit_hit) return o;
    }
    o.f2 = neg_frac + ctx.cfg.weight * pos_frac;
    o.valid = true;
    return o;
}

// Decode, then shed overflow edits beyond the simultaneous-edit cap. Points
// are ordered by falling suspiciousness, so the front of the list survives.
inline std::vector<Edit> decode_for_eval(Patch& x, RepairContext& ctx) {
    std::vector<Edit> edits = decode(x, ctx.points, ctx.cfg.rules.decode_rules);
    if (ctx.cfg.n_e > 0 && static_cast<int>(edits.size()) > ctx.cfg.n_e)
        edits.resize(static_cast<size_t>(ctx.cfg.n_e));
    return edits;
}

inline Objectives evaluate(Patch& x, RepairContext& ctx) {
    return evaluate_edits(decode_for_eval(x, ctx), ctx);
}

struct ArchiveEntry {
    std::vector<Edit> edits;
    std::string script;  // canonical edit text, doubles as the dedup key
    Objectives obj;
    int64_t found_at_eval = 0;
};

struct GenStat {
    int generation = 0;
    std::optional<double> best_f2;  // best valid f2 in the population, if any
    int archive_size = 0;
    int64_t evaluations = 0;
};

struct RepairResult {
    std::vector<ArchiveEntry> archive;
    std::optional<int64_t> evaluations_to_first;
    int64_t evaluations = 0;
    std::vector<GenStat> generations;
    std::vector<std::string> anomalies;
};

// A candidate repair must pass the complete original suite before entering
// the archive. A search survivor failing here exposes a filtering or
// sampling defect, so it is logged rather than silently dropped.
inline void try_archive(const std::vector<Edit>& edits, const Objectives& o, RepairContext& ctx,
                        RepairResult& res) {
    if (!o.valid || o.f2 != 0.0 || edits.empty()) return;
    std::string script = edit_script(edits);
    for (const auto& e : res.archive)
        if (e.script == script) return;
    Program patched = apply_edits(*ctx.program, edits);
    if (auto err = validate_program(patched)) {
        res.anomalies.push_back("candidate patch fails validation: " + err->str());
        return;
    }
    for (size_t t = 0; t < ctx.suite->tests.size(); ++t) {
        TestResult r = execute_test(patched, ctx.suite->tests[t], ctx.cfg.step_limit);
        if (r.verdict != Verdict::Pass) {
            res.anomalies.push_back("candidate patch fails full-suite test '" +
                                    ctx.suite->tests[t].name + "' [" + script + "]");
            return;
        }
    }
    if (res.archive.empty()) res.evaluations_to_first = ctx.evaluations;
    res.archive.push_back(ArchiveEntry{edits, std::move(script), o, ctx.evaluations});
}

namespace detail {

inline std::optional<double> best_valid_f2(const std::vector<Objectives>& pop) {
    std::optional<double> best;
    for (const auto& o : pop)
        if (o.valid && (!best || o.f2 < *best)) best = o.f2;
    return best;
}

inline double scalar_fitness(const Objectives& o) { return o.valid ? o.f2 : kInf; }

}  // namespace detail

inline RepairResult run_nsga2(RepairContext& ctx) {
    RepairResult res;
    const std::vector<ModificationPoint>& points = ctx.points;
    const int n_pop = ctx.cfg.population;
    std::vector<Patch> pop = init_population(n_pop, points, ctx.cfg.mu, ctx.rng);
    std::vector<Objectives> obj(pop.size());
    for (size_t i = 0; i < pop.size(); ++i) {
        std::vector<Edit> edits = decode_for_eval(pop[i], ctx);
        obj[i] = evaluate_edits(edits, ctx);
        try_archive(edits, obj[i], ctx, res);
    }
    res.generations.push_back(
        {1, detail::best_valid_f2(obj), static_cast<int>(res.archive.size()), ctx.evaluations});

    for (int gen = 2; gen <= ctx.cfg.generations; ++gen) {
        std::vector<std::vector<int>> fronts = fast_nondominated_sort(obj);
        std::vector<int> rank(pop.size(), 0);
        std::vector<double> crowd(pop.size(), 0.0);
        for (size_t fi = 0; fi < fronts.size(); ++fi) {
            std::vector<Objectives> sub;
            sub.reserve(fronts[fi].size());
            for (int i : fronts[fi]) sub.push_back(obj[static_cast<size_t>(i)]);
            std::vector<double> d = crowding_distance(sub);
            for (size_t k = 0; k < fronts[fi].size(); ++k) {
                rank[static_cast<size_t>(fronts[fi][k])] = static_cast<int>(fi);
                crowd[static_cast<size_t>(fronts[fi][k])] = d[k];
            }
        }

        std::vector<Patch> off;
        off.reserve(static_cast<size_t>(n_pop));
        while (static_cast<int>(off.size()) < n_pop) {
            Patch a = pop[static_cast<size_t>(tournament_pick(rank, crowd, ctx.rng))];
            Patch b = pop[static_cast<size_t>(tournament_pick(rank, crowd, ctx.rng))];
            if (ctx.rng.bernoulli(ctx.cfg.p_c)) crossover(a, b, points, ctx.rng);
            mutate(a, points, ctx.cfg.p_m, ctx.rng);
            mutate(b, points, ctx.cfg.p_m, ctx.rng);
            off.push_back(std::move(a));
            if (static_cast<int>(off.size()) < n_pop) off.push_back(std::move(b));
        }
        std::vector<Objectives> off_obj(off.size());
        for (size_t i = 0; i < off.size(); ++i) {
            std::vector<Edit> edits = decode_for_eval(off[i], ctx);
            off_obj[i] = evaluate_edits(edits, ctx);
            try_archive(edits, off_obj[i], ctx, res);
        }

        std::vector<Patch> all = std::move(pop);
        all.insert(all.end(), std::make_move_iterator(off.begin()),
                   std::make_move_iterator(off.end()));
        std::vector<Objectives> all_obj = std::move(obj);
        all_obj.insert(all_obj.end(), off_obj.begin(), off_obj.end());

        std::vector<int> chosen;
        chosen.reserve(static_cast<size_t>(n_pop));
        for (const std::vector<int>& front : fast_nondominated_sort(all_obj)) {
            if (chosen.size() + front.size() <= static_cast<size_t>(n_pop)) {
                chosen.insert(chosen.end(), front.begin(), front.end());
                if (chosen.size() == static_cast<size_t>(n_pop)) break;
                continue;
            }
            std::vector<Objectives> sub;
            sub.reserve(front.size());
            for (int i : front) sub.push_back(all_obj[static_cast<size_t>(i)]);
            std::vector<double> d = crowding_distance(sub);
            std::vector<size_t> order(front.size());
            std::iota(order.begin(), order.end(), size_t{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](size_t x, size_t y) { return d[x] > d[y]; });
            for (size_t k = 0; chosen.size() < static_cast<size_t>(n_pop); ++k)
                chosen.push_back(front[order[k]]);
            break;
        }
        pop.clear();
        obj.clear();
        pop.reserve(chosen.size());
        obj.reserve(chosen.size());
        for (int i : chosen) {
            pop.push_back(std::move(all[static_cast<size_t>(i)]));
            obj.push_back(all_obj[static_cast<size_t>(i)]);
        }
        res.generations.push_back({gen, detail::best_valid_f2(obj),
                                   static_cast<int>(res.archive.size()), ctx.evaluations});
    }
    res.evaluations = ctx.evaluations;
    return res;
}

// Elitist single-objective GA over f2 with the same operators and budget.
inline RepairResult run_single_objective(RepairContext& ctx) {
    RepairResult res;
    const std::vector<ModificationPoint>& points = ctx.points;
    const int n_pop = ctx.cfg.population;
    std::vector<Patch> pop = init_population(n_pop, points, ctx.cfg.mu, ctx.rng);
    std::vector<Objectives> obj(pop.size());
    for (size_t i = 0; i < pop.size(); ++i) {
        std::vector<Edit> edits = decode_for_eval(pop[i], ctx);
        obj[i] = evaluate_edits(edits, ctx);
        try_archive(edits, obj[i], ctx, res);
    }
    res.generations.push_back(
        {1, detail::best_valid_f2(obj), static_cast<int>(res.archive.size()), ctx.evaluations});

    for (int gen = 2; gen <= ctx.cfg.generations; ++gen) {
        auto pick = [&]() {
            size_t a = ctx.rng.uniform_index(pop.size());
            size_t b = ctx.rng.uniform_index(pop.size());
            double fa = detail::scalar_fitness(obj[a]);
            double fb = detail::scalar_fitness(obj[b]);
            if (fa != fb) return fa < fb ? a : b;
            return ctx.rng.bernoulli(0.5) ? a : b;
        };
        std::vector<Patch> off;
        off.reserve(static_cast<size_t>(n_pop));
        while (static_cast<int>(off.size()) < n_pop) {
            Patch a = pop[pick()];
            Patch b = pop[pick()];
            if (ctx.rng.bernoulli(ctx.cfg.p_c)) crossover(a, b, points, ctx.rng);
            mutate(a, points, ctx.cfg.p_m, ctx.rng);
            mutate(b, points, ctx.cfg.p_m, ctx.rng);
            off.push_back(std::move(a));
            if (static_cast<int>(off.size()) < n_pop) off.push_back(std::move(b));
        }
        std::vector<Objectives> off_obj(off.size());
        for (size_t i = 0; i < off.size(); ++i) {
            std::vector<Edit> edits = decode_for_eval(off[i], ctx);
            off_obj[i] = evaluate_edits(edits, ctx);
            try_archive(edits, off_obj[i], ctx, res);
        }
        std::vector<Patch> all = std::move(pop);
        all.insert(all.end(), std::make_move_iterator(off.begin()),
                   std::make_move_iterator(off.end()));
        std::vector<Objectives> all_obj = std::move(obj);
        all_obj.insert(all_obj.end(), off_obj.begin(), off_obj.end());
        std::vector<size_t> order(all.size());
        std::iota(order.begin(), order.end(), size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](size_t x, size_t y) {
            return detail::scalar_fitness(all_obj[x]) < detail::scalar_fitness(all_obj[y]);
        });
        pop.clear();
        obj.clear();
        for (int i = 0; i < n_pop; ++i) {
            pop.push_back(std::move(all[order[static_cast<size_t>(i)]]));
            obj.push_back(all_obj[order[static_cast<size_t>(i)]]);
        }
        res.generations.push_back({gen, detail::best_valid_f2(obj),
                                   static_cast<int>(res.archive.size()), ctx.evaluations});
    }
    res.evaluations = ctx.evaluations;
    return res;
}

// Every individual drawn the way initialization draws them, no evolution,
// same total budget.
inline RepairResult run_random_search(RepairContext& ctx) {
    RepairResult res;
    for (int gen = 1; gen <= ctx.cfg.generations; ++gen) {
        std::optional<double> best;
        for (int i = 0; i < ctx.cfg.population; ++i) {
            Patch x = sample_patch(ctx.points, ctx.cfg.mu, ctx.rng);
            std::vector<Edit> edits = decode_for_eval(x, ctx);
            Objectives o = evaluate_edits(edits, ctx);
            try_archive(edits, o, ctx, res);
            if (o.valid && (!best || o.f2 < *best)) best = o.f2;
        }
        res.generations.push_back(
            {gen, best, static_cast<int>(res.archive.size()), ctx.evaluations});
    }
    res.evaluations = ctx.evaluations;
    return res;
}

// Deterministic statement-skipping sweep in falling suspiciousness order.
// Per candidate: plain deletion, an always-false If condition, and a typed
// early return inserted in front of the statement.
inline RepairResult run_deletion_baseline(RepairContext& ctx) {
    RepairResult res;
    std::optional<double> best;
    for (const SuspiciousStatement& cand : ctx.candidates) {
        auto found = find_statement(*ctx.program, cand.id);
        if (!found) continue;
        const Statement& stmt = *found->stmt;
        std::vector<std::vector<Edit>> attempts;
        attempts.push_back({Edit{OpKind::Delete, cand.id, -1, std::nullopt}});
        if (stmt.kind == StmtKind::If) {
            Statement skipped = stmt;
            skipped.expr() = Expr::bool_lit(false);
            attempts.push_back({Edit{OpKind::Replace, cand.id, -1, std::move(skipped)}});
        }
        Statement ret;
        ret.kind = StmtKind::Return;
        switch (found->ctx.fn_return_type) {
            case ValueType::Int: ret.exprs.push_back(Expr::int_lit(0)); break;
            case ValueType::Float: ret.exprs.push_back(Expr::float_lit(0.0)); break;
            case ValueType::Bool: ret.exprs.push_back(Expr::bool_lit(false)); break;
            case ValueType::Str: ret.exprs.push_back(Expr::str_lit("")); break;
            case ValueType::Void: break;
        }
        attempts.push_back({Edit{OpKind::Insert, cand.id, -1, std::move(ret)}});
        for (const std::vector<Edit>& edits : attempts) {
            Objectives o = evaluate_edits(edits, ctx);
            try_archive(edits, o, ctx, res);
            if (o.valid && (!best || o.f2 < *best)) best = o.f2;
        }
    }
    res.generations.push_back(
        {1, best, static_cast<int>(res.archive.size()), ctx.evaluations});
    res.evaluations = ctx.evaluations;
    return res;
}

inline RepairResult run_search(RepairContext& ctx) {
    switch (ctx.cfg.variant) {
        case Variant::ArjaS: return run_single_objective(ctx);
        case Variant::ArjaR: return run_random_search(ctx);
        case Variant::Kali: return run_deletion_baseline(ctx);
        default: return run_nsga2(ctx);
    }
}

}  // namespace mlrepair
