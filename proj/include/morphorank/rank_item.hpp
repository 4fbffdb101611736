#pragma once
// One concept's ranking problem, with features precomputed over its full
// candidate pool. Shared between training and evaluation.

#include <string>
#include <vector>

#include "morphorank/features.hpp"

namespace morphorank {

struct RankItem {
    std::string word;
    int year = 0;
    FeatureBatch batch;                   // full pool, gold at batch.gold_index
    std::vector<uint8_t> overlaps_gold;   // candidate shares >= 1 morpheme with gold
    std::vector<std::string> labels;      // "m1+m2+m3" per candidate (may be empty)
    bool gold_gated_out = false;
};

}  // namespace morphorank
