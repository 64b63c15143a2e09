#include "entrate/suffix.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

namespace entrate {

SuffixStructures build_suffix_structures(std::span<const std::uint32_t> text) {
    const std::size_t n = text.size();
    SuffixStructures s;
    if (n == 0) return s;

    s.sa.resize(n);
    s.rank.resize(n);
    std::vector<std::uint32_t> tmp(n);

    std::iota(s.sa.begin(), s.sa.end(), 0u);
    std::sort(s.sa.begin(), s.sa.end(),
              [&](std::uint32_t a, std::uint32_t b) { return text[a] < text[b]; });
    s.rank[s.sa[0]] = 0;
    for (std::size_t r = 1; r < n; ++r) {
        s.rank[s.sa[r]] = s.rank[s.sa[r - 1]] + (text[s.sa[r]] != text[s.sa[r - 1]] ? 1 : 0);
    }

    for (std::size_t k = 1; k < n && s.rank[s.sa[n - 1]] + 1 < n; k *= 2) {
        auto key = [&](std::uint32_t i) {
            std::uint64_t second = i + k < n ? std::uint64_t(s.rank[i + k]) + 1 : 0;
            return (std::uint64_t(s.rank[i]) << 32) | second;
        };
        std::sort(s.sa.begin(), s.sa.end(),
                  [&](std::uint32_t a, std::uint32_t b) { return key(a) < key(b); });
        tmp[s.sa[0]] = 0;
        for (std::size_t r = 1; r < n; ++r) {
            tmp[s.sa[r]] = tmp[s.sa[r - 1]] + (key(s.sa[r]) != key(s.sa[r - 1]) ? 1 : 0);
        }
        s.rank.swap(tmp);
    }

    // Kasai
    s.lcp.assign(n, 0);
    std::size_t h = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (s.rank[i] == 0) {
            h = 0;
            continue;
        }
        std::size_t j = s.sa[s.rank[i] - 1];
        while (i + h < n && j + h < n && text[i + h] == text[j + h]) ++h;
        s.lcp[s.rank[i]] = std::uint32_t(h);
        if (h > 0) --h;
    }
    return s;
}

namespace {

// Static range-minimum table over the LCP array.
class SparseMin {
public:
    explicit SparseMin(const std::vector<std::uint32_t>& a) : n_(a.size()) {
        levels_ = std::bit_width(n_); // top level serves len = n_ queries
        table_.resize(levels_);
        table_[0] = a;
        for (std::size_t l = 1; l < levels_; ++l) {
            std::size_t half = std::size_t(1) << (l - 1);
            table_[l].resize(n_ > 2 * half - 1 ? n_ - 2 * half + 1 : 0);
            for (std::size_t i = 0; i + 2 * half <= n_; ++i) {
                table_[l][i] = std::min(table_[l - 1][i], table_[l - 1][i + half]);
            }
        }
    }

    // min over [lo, hi] inclusive; requires lo <= hi
    std::uint32_t query(std::size_t lo, std::size_t hi) const {
        std::size_t len = hi - lo + 1;
        std::size_t l = std::bit_width(len) - 1;
        return std::min(table_[l][lo], table_[l][hi + 1 - (std::size_t(1) << l)]);
    }

private:
    std::size_t n_;
    std::size_t levels_;
    std::vector<std::vector<std::uint32_t>> table_;
};

} // namespace

std::vector<std::uint32_t> longest_previous_factor(std::span<const std::uint32_t> text) {
    const std::size_t n = text.size();
    std::vector<std::uint32_t> lpf(n, 0);
    if (n < 2) return lpf;

    SuffixStructures s = build_suffix_structures(text);
    SparseMin rmq(s.lcp);

    constexpr std::size_t kNone = std::size_t(-1);
    // For each rank, the nearest rank on each side whose suffix starts
    // earlier in the text. Nearest suffices: LCP to a farther rank can only
    // be smaller, so the neighbor dominates all candidates on its side.
    std::vector<std::size_t> up(n, kNone), down(n, kNone);
    {
        std::vector<std::size_t> stack;
        for (std::size_t r = 0; r < n; ++r) {
            while (!stack.empty() && s.sa[stack.back()] > s.sa[r]) stack.pop_back();
            up[r] = stack.empty() ? kNone : stack.back();
            stack.push_back(r);
        }
        stack.clear();
        for (std::size_t r = n; r-- > 0;) {
            while (!stack.empty() && s.sa[stack.back()] > s.sa[r]) stack.pop_back();
            down[r] = stack.empty() ? kNone : stack.back();
            stack.push_back(r);
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = s.rank[i];
        std::uint32_t best = 0;
        if (up[r] != kNone) best = std::max(best, rmq.query(up[r] + 1, r));
        if (down[r] != kNone) best = std::max(best, rmq.query(r + 1, down[r]));
        lpf[i] = best;
    }
    return lpf;
}

} // namespace entrate
