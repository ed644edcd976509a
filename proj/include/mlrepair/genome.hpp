#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlrepair/ingredients.hpp"
#include "mlrepair/rng.hpp"

namespace mlrepair {

// Three-part genome over n modification points: b picks the active points,
// u the operation (1-based into O_j), v the ingredient (1-based into I_j',
// pinned to 1 and inert when the point has no ingredients).
struct Patch {
    std::vector<uint8_t> b;
    std::vector<int> u;
    std::vector<int> v;

    size_t size() const { return b.size(); }
    bool operator==(const Patch&) const = default;
};

struct Edit {
    OpKind op = OpKind::Delete;
    StatementId at;
    int point_index = -1;
    std::optional<Statement> ingredient;
};

inline std::string edit_text(const Edit& e) {
    std::string out;
    switch (e.op) {
        case OpKind::Delete: out = "D "; break;
        case OpKind::Replace: out = "R "; break;
        case OpKind::Insert: out = "I "; break;
    }
    out += e.at.str();
    if (e.ingredient) {
        out += ' ';
        out += stmt_text(*e.ingredient);
    }
    return out;
}

inline std::string edit_script(const std::vector<Edit>& edits) {
    std::string out;
    for (const auto& e : edits) {
        out += edit_text(e);
        out += '\n';
    }
    return out;
}

// Degenerate edits that cannot improve anything (no-op replaces, doomed
// redeclarations, unreachable-code inserts) are dropped at decode time.
inline bool edit_suppressed(const ModificationPoint& mp, OpKind op, const Statement& ing) {
    if (op == OpKind::Replace) {
        if (stmt_equal(ing, mp.stmt)) return true;
        if (mp.stmt.kind == StmtKind::VarDecl && ing.kind != StmtKind::VarDecl) return true;
        if (mp.ctx.last_of_function && mp.stmt.kind == StmtKind::Return && mp.stmt.has_expr() &&
            ing.kind != StmtKind::Return)
            return true;
    } else if (op == OpKind::Insert) {
        if (ing.kind == StmtKind::Return) return true;
        if (ing.kind == StmtKind::VarDecl && mp.stmt.kind == StmtKind::VarDecl) return true;
        if (ing.kind == StmtKind::Assign && mp.stmt.kind == StmtKind::Assign &&
            ing.name == mp.stmt.name)
            return true;
    }
    return false;
}

// A suppressed edit clears its b bit, so patch size afterwards counts only
// the edits that actually land.
inline std::vector<Edit> decode(Patch& x, const std::vector<ModificationPoint>& points,
                                bool decode_rules) {
    std::vector<Edit> edits;
    for (size_t j = 0; j < points.size(); ++j) {
        if (!x.b[j]) continue;
        const ModificationPoint& mp = points[j];
        OpKind op = mp.ops[static_cast<size_t>(x.u[j] - 1)];
        if (op == OpKind::Delete) {
            edits.push_back(Edit{op, mp.id, mp.index, std::nullopt});
            continue;
        }
        const Statement& ing = mp.ingredients[static_cast<size_t>(x.v[j] - 1)].stmt;
        if (decode_rules && edit_suppressed(mp, op, ing)) {
            x.b[j] = 0;
            continue;
        }
        edits.push_back(Edit{op, mp.id, mp.index, ing});
    }
    return edits;
}

namespace detail {

inline std::vector<Statement> apply_to_block(const std::vector<Statement>& body,
                                             const std::map<StatementId, const Edit*>& by_id) {
    std::vector<Statement> out;
    for (const auto& s : body) {
        auto it = by_id.find(s.id);
        if (it != by_id.end()) {
            const Edit& e = *it->second;
            if (e.op == OpKind::Insert) {
                out.push_back(*e.ingredient);
            } else if (e.op == OpKind::Delete) {
                continue;  // swallows edits nested inside s
            } else {
                out.push_back(*e.ingredient);
                continue;
            }
        }
        Statement copy = s;
        copy.body = apply_to_block(s.body, by_id);
        copy.else_body = apply_to_block(s.else_body, by_id);
        out.push_back(std::move(copy));
    }
    return out;
}

}  // namespace detail

// Targets are ids of the original program, so edits commute: insertion never
// shifts a later target.
inline Program apply_edits(const Program& p, const std::vector<Edit>& edits) {
    std::map<StatementId, const Edit*> by_id;
    for (const auto& e : edits) by_id[e.at] = &e;
    Program out = p;
    for (auto& m : out.modules)
        for (auto& f : m.functions) f.body = detail::apply_to_block(f.body, by_id);
    finalize(out);
    return out;
}

inline Patch sample_patch(const std::vector<ModificationPoint>& points, double mu, Rng& rng) {
    Patch x;
    x.b.resize(points.size());
    x.u.resize(points.size());
    x.v.resize(points.size());
    for (size_t j = 0; j < points.size(); ++j) {
        x.b[j] = rng.bernoulli(points[j].susp * mu) ? 1 : 0;
        x.u[j] = 1 + static_cast<int>(rng.uniform_index(points[j].ops.size()));
        x.v[j] = points[j].ingredients.empty()
                     ? 1
                     : 1 + static_cast<int>(rng.uniform_index(points[j].ingredients.size()));
    }
    return x;
}

inline std::vector<Patch> init_population(int n, const std::vector<ModificationPoint>& points,
                                          double mu, Rng& rng) {
    std::vector<Patch> pop;
    pop.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) pop.push_back(sample_patch(points, mu, rng));
    return pop;
}

// b: half uniform crossover, swapping exactly floor(h/2) of the h differing
// bits. u, v: single-point suffix swaps with independent cut points. Values
// are positional, so per-point bounds survive the swaps; the clamp below is
// defensive only.
inline void crossover(Patch& a, Patch& b, const std::vector<ModificationPoint>& points, Rng& rng) {
    std::vector<size_t> diff;
    for (size_t j = 0; j < a.b.size(); ++j)
        if (a.b[j] != b.b[j]) diff.push_back(j);
    rng.shuffle(diff);
    for (size_t t = 0; t < diff.size() / 2; ++t) std::swap(a.b[diff[t]], b.b[diff[t]]);

    size_t n = a.u.size();
    if (n >= 2) {
        size_t cut = 1 + rng.uniform_index(n - 1);
        for (size_t j = cut; j < n; ++j) std::swap(a.u[j], b.u[j]);
        cut = 1 + rng.uniform_index(n - 1);
        for (size_t j = cut; j < n; ++j) std::swap(a.v[j], b.v[j]);
    }
    for (size_t j = 0; j < n; ++j) {
        int umax = static_cast<int>(points[j].ops.size());
        int vmax = static_cast<int>(std::max<size_t>(points[j].ingredients.size(), 1));
        if (a.u[j] > umax) a.u[j] = 1 + static_cast<int>(rng.uniform_index(points[j].ops.size()));
        if (b.u[j] > umax) b.u[j] = 1 + static_cast<int>(rng.uniform_index(points[j].ops.size()));
        if (a.v[j] > vmax) a.v[j] = 1 + static_cast<int>(rng.uniform_index(static_cast<size_t>(vmax)));
        if (b.v[j] > vmax) b.v[j] = 1 + static_cast<int>(rng.uniform_index(static_cast<size_t>(vmax)));
    }
}

inline void mutate(Patch& x, const std::vector<ModificationPoint>& points, double p_m, Rng& rng) {
    for (size_t j = 0; j < x.b.size(); ++j) {
        if (rng.bernoulli(p_m)) x.b[j] ^= 1;
        if (rng.bernoulli(p_m))
            x.u[j] = 1 + static_cast<int>(rng.uniform_index(points[j].ops.size()));
        if (!points[j].ingredients.empty() && rng.bernoulli(p_m))
            x.v[j] = 1 + static_cast<int>(rng.uniform_index(points[j].ingredients.size()));
    }
}

}  // namespace mlrepair
