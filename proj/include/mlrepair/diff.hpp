#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

namespace mlrepair {

inline std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

namespace detail {

struct DiffLine {
    char tag;  // ' ', '-', '+'
    std::string text;
};

// Longest-common-subsequence alignment; ties broken toward deletions first so
// runs print removed lines before their replacements.
inline std::vector<DiffLine> align_lines(const std::vector<std::string>& a,
                                         const std::vector<std::string>& b) {
    size_t n = a.size(), m = b.size();
    std::vector<std::vector<int>> lcs(n + 1, std::vector<int>(m + 1, 0));
    for (size_t i = n; i-- > 0;)
        for (size_t j = m; j-- > 0;)
            lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1
                                     : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    std::vector<DiffLine> out;
    size_t i = 0, j = 0;
    while (i < n && j < m) {
        if (a[i] == b[j]) {
            out.push_back({' ', a[i]});
            ++i;
            ++j;
        } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
            out.push_back({'-', a[i]});
            ++i;
        } else {
            out.push_back({'+', b[j]});
            ++j;
        }
    }
    while (i < n) out.push_back({'-', a[i++]});
    while (j < m) out.push_back({'+', b[j++]});
    return out;
}

}  // namespace detail

// Unified diff of two texts. Returns the empty string when they are equal.
inline std::string unified_diff(const std::string& a_text, const std::string& b_text,
                                const std::string& a_label, const std::string& b_label,
                                int context = 3) {
    std::vector<std::string> a = split_lines(a_text);
    std::vector<std::string> b = split_lines(b_text);
    std::vector<detail::DiffLine> lines = detail::align_lines(a, b);

    std::vector<size_t> changes;
    for (size_t i = 0; i < lines.size(); ++i)
        if (lines[i].tag != ' ') changes.push_back(i);
    if (changes.empty()) return "";

    std::ostringstream out;
    out << "--- " << a_label << "\n+++ " << b_label << "\n";

    // line numbers of a-side/b-side content preceding each position
    std::vector<size_t> a_before(lines.size() + 1, 0), b_before(lines.size() + 1, 0);
    for (size_t i = 0; i < lines.size(); ++i) {
        a_before[i + 1] = a_before[i] + (lines[i].tag != '+' ? 1 : 0);
        b_before[i + 1] = b_before[i] + (lines[i].tag != '-' ? 1 : 0);
    }

    size_t ci = 0;
    while (ci < changes.size()) {
        size_t group_end = ci;
        while (group_end + 1 < changes.size() &&
               changes[group_end + 1] - changes[group_end] <= 2 * static_cast<size_t>(context))
            ++group_end;
        size_t lo = changes[ci] >= static_cast<size_t>(context)
                        ? changes[ci] - static_cast<size_t>(context)
                        : 0;
        size_t hi = std::min(lines.size(), changes[group_end] + static_cast<size_t>(context) + 1);

        size_t a_count = a_before[hi] - a_before[lo];
        size_t b_count = b_before[hi] - b_before[lo];
        size_t a_start = a_count == 0 ? a_before[lo] : a_before[lo] + 1;
        size_t b_start = b_count == 0 ? b_before[lo] : b_before[lo] + 1;
        out << "@@ -" << a_start << "," << a_count << " +" << b_start << "," << b_count
            << " @@\n";
        for (size_t i = lo; i < hi; ++i) out << lines[i].tag << lines[i].text << "\n";
        ci = group_end + 1;
    }
    return out.str();
}

}  // namespace mlrepair
