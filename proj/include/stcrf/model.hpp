#pragma once

#include <string>
#include <vector>

#include "stcrf/core.hpp"

namespace stcrf {

// Materialized per-instance potentials: unary[t][l] = v_l . (W_t x),
// binary[t](l,l') = v_l . (Z_t v_l').
struct PotentialTables {
    std::vector<Vec> unary;
    std::vector<Mat> binary;

    int length() const { return static_cast<int>(unary.size()); }
    int num_labels(int t) const { return static_cast<int>(unary.at(t).size()); }
};

Vec unary_table(const ModelParams &params, const EmbeddingSet &emb, const Vec &x, int t);
Mat binary_table(const ModelParams &params, const EmbeddingSet &emb, int t);
PotentialTables build_tables(const ModelParams &params, const EmbeddingSet &emb,
                             const Vec &x);

// Chain score: sum of unary entries at y plus binary entries at adjacent pairs.
double score(const PotentialTables &tables, const std::vector<int> &y);
double score(const ModelParams &params, const EmbeddingSet &emb, const Vec &x,
             const std::vector<int> &y);

struct MatrixRank {
    std::string name;
    std::vector<double> singular_values;  // descending
    int effective_rank = 0;               // count of sigma_i > tolerance * sigma_max
    double nuclear_norm = 0.0;
};

struct RankReport {
    std::vector<MatrixRank> unary;
    std::vector<MatrixRank> binary;
};

RankReport rank_report(const ModelParams &params, double tolerance);

}  // namespace stcrf
