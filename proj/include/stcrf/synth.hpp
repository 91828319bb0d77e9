#pragma once

#include <vector>

#include "stcrf/io.hpp"

namespace stcrf {

// Synthetic low-rank chain problem: Gaussian embeddings and inputs, rank-r
// factor parameter matrices, gold tuples sampled exactly from P(y|x) by
// enumeration.
struct SynthConfig {
    int chain_length = 3;
    std::vector<int> label_counts;    // one entry, broadcast, or one per position
    std::vector<int> embedding_dims;  // same convention
    int input_dim = 20;
    int rank = 2;
    int samples = 1000;
    int test_samples = 0;
    double noise = 0.0;        // feature noise added after sampling
    double score_scale = 1.0;  // multiplies W and Z; larger means more peaked
    unsigned seed = 1;

    void validate() const;
    int labels_at(int t) const;
    int dims_at(int t) const;
};

struct SynthOutput {
    Model true_model;  // the generating model
    Dataset train;
    Dataset test;
};

SynthOutput generate_synthetic(const SynthConfig &config);

}  // namespace stcrf
