#pragma once

// Independent reference implementations the real code is tested against.
// These are deliberately naive: correctness over speed.

#include <cstring>
#include <span>
#include <string>
#include <vector>

namespace oracle {

// Textbook memoized recursion for unit-cost Levenshtein distance.
// Bounded to short sequences; the memo lives on the caller's stack.
class LevenshteinOracle {
public:
    static constexpr size_t kMax = 16;

    long long distance(std::span<const std::string> a, std::span<const std::string> b) {
        n_ = a.size();
        m_ = b.size();
        std::memset(memo_, -1, sizeof(memo_));
        return solve(0, 0, a, b);
    }

private:
    long long solve(size_t i, size_t j, std::span<const std::string> a, std::span<const std::string> b) {
        if (i == n_) return static_cast<long long>(m_ - j);
        if (j == m_) return static_cast<long long>(n_ - i);
        short& slot = memo_[i][j];
        if (slot >= 0) return slot;
        long long best;
        if (a[i] == b[j]) {
            best = solve(i + 1, j + 1, a, b);
        } else {
            long long sub = solve(i + 1, j + 1, a, b);
            long long del = solve(i + 1, j, a, b);
            long long ins = solve(i, j + 1, a, b);
            best = 1 + std::min(sub, std::min(del, ins));
        }
        slot = static_cast<short>(best);
        return best;
    }

    size_t n_ = 0, m_ = 0;
    short memo_[kMax][kMax];
};

// Every sequence over `alphabet` of length <= max_len, shortest first.
inline std::vector<std::vector<std::string>> all_sequences(const std::vector<std::string>& alphabet,
                                                           size_t max_len) {
    std::vector<std::vector<std::string>> out;
    out.push_back({});
    size_t level_start = 0;
    for (size_t len = 1; len <= max_len; ++len) {
        size_t level_end = out.size();
        for (size_t i = level_start; i < level_end; ++i) {
            for (const std::string& sym : alphabet) {
                std::vector<std::string> next = out[i];
                next.push_back(sym);
                out.push_back(std::move(next));
            }
        }
        level_start = level_end;
    }
    return out;
}

} // namespace oracle
