#pragma once

#include <utility>
#include <vector>

#include "stcrf/core.hpp"
#include "stcrf/model.hpp"

namespace stcrf {

struct ScoredSequence {
    std::vector<int> labels;
    double score = 0.0;
};

struct MarginalSet {
    std::vector<Vec> unary_marginals;    // per position, sums to 1
    std::vector<Mat> pairwise_marginals; // per adjacent pair
    double log_partition = 0.0;
};

// log sum_y exp(score(y)), forward recursion in log space.
double log_partition(const PotentialTables &tables);

// Exact forward-backward marginals.
MarginalSet marginals(const PotentialTables &tables);

// Highest-scoring sequence; ties broken toward the lexicographically
// smallest id sequence.
ScoredSequence viterbi(const PotentialTables &tables);

// The k highest-scoring distinct sequences, descending; fewer if the
// sequence space is smaller. Ties broken lexicographically.
std::vector<ScoredSequence> kbest(const PotentialTables &tables, int k);

// Exhaustive scoring of every sequence, sorted descending with the same
// tie-break. Test oracle for the dynamic programs above.
std::vector<ScoredSequence> brute_force(const PotentialTables &tables,
                                        std::size_t limit = 1000000);

// exp(score(y) - log_partition).
double conditional_prob(const ModelParams &params, const EmbeddingSet &emb,
                        const Vec &x, const std::vector<int> &y);

}  // namespace stcrf
