#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace entrate {

/*
 * Suffix-array machinery backing the match-length estimator: prefix-doubling
 * suffix array, Kasai LCP, and the longest-previous-factor table.
 */

struct SuffixStructures {
    std::vector<std::uint32_t> sa;   // suffix start positions in lexical order
    std::vector<std::uint32_t> rank; // inverse of sa
    std::vector<std::uint32_t> lcp;  // lcp[r] = LCP(sa[r-1], sa[r]); lcp[0] = 0
};

SuffixStructures build_suffix_structures(std::span<const std::uint32_t> text);

// lpf[i] = length of the longest prefix of text[i..] that also starts at some
// position j < i (the earlier copy may overlap i). lpf[0] = 0.
std::vector<std::uint32_t> longest_previous_factor(std::span<const std::uint32_t> text);

} // namespace entrate
