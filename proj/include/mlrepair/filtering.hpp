#pragma once

#include <vector>

#include "mlrepair/fault.hpp"

namespace mlrepair {

struct TestPartition {
    std::vector<int> t_f;      // negative tests (all retained)
    std::vector<int> t_c;      // positive tests touching a candidate
    std::vector<int> dropped;  // positive tests safe to skip during search
};

// Positive tests that never execute any candidate statement cannot observe a
// candidate-local edit, so they keep passing under every decoded patch.
inline TestPartition filter_positive_tests(const CoverageMatrix& m,
                                           const std::vector<SuspiciousStatement>& candidates) {
    Bitset cand(static_cast<size_t>(m.statement_count));
    for (const auto& c : candidates) cand.set(static_cast<size_t>(c.global_index));
    TestPartition part;
    part.t_f = m.failing;
    for (int t : m.passing) {
        if (m.results[static_cast<size_t>(t)].covered.intersects(cand))
            part.t_c.push_back(t);
        else
            part.dropped.push_back(t);
    }
    return part;
}

}  // namespace mlrepair
