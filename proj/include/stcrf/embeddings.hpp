#pragma once

#include <string>

#include "stcrf/core.hpp"

namespace stcrf {

// Symmetric exchangeability counts for one argument type: counts(i, j) is
// the number of times labels i and j appeared at this position in two
// tuples of the same image that agree everywhere else. Zero diagonal.
struct CooccurrenceCounts {
    std::string argument_type;
    Eigen::MatrixXi counts;
};

// Identity embeddings, n_t = |L_t| per position.
EmbeddingSet indicator_embeddings(const ChainSpec &spec);

CooccurrenceCounts count_equivalences(const Dataset &dataset, int position);

// Row-normalized counts; rows with zero sum fall back to the indicator row.
Mat ser_embeddings(const CooccurrenceCounts &counts);

enum class OovPolicy { Fail, IndicatorFallback };

// Loads rows for every vocabulary token from a word-vector text file
// (optional "count dim" header, then "token f1 ... fdim" lines).
// Under IndicatorFallback the result is |L| x (dim + |L|): missing tokens
// get a zero dense part plus a one-hot extension column, present tokens a
// zero extension.
Mat load_external_vectors(const std::string &path, const Vocabulary &vocab, int dim,
                          OovPolicy policy);

// Writes one "token f1 ... fdim" line per vocabulary entry, with a
// "count dim" header. Floats are round-trip exact.
void write_vectors(const std::string &path, const Vocabulary &vocab, const Mat &matrix);

}  // namespace stcrf
