#pragma once

#include <string>
#include <vector>

#include "stcrf/core.hpp"

namespace stcrf {

enum class StepSchedule { Constant, InverseSqrt };

struct TrainConfig {
    double c1 = 0.0;        // nuclear-norm weight on unary matrices
    double c2 = 0.0;        // nuclear-norm weight on binary matrices
    double base_step = 0.1; // initial learning rate
    int max_iter = 100;
    StepSchedule step_schedule = StepSchedule::InverseSqrt;
    unsigned seed = 0;
    double tolerance = 0.0; // relative objective-change stopping threshold

    void validate() const;
};

struct IterationRecord {
    int iteration = 0;
    double objective = 0.0;
    double loss = 0.0;
    double nuclear_sum = 0.0;
    std::vector<int> unary_ranks;
    std::vector<int> binary_ranks;
};

struct TrainResult {
    ModelParams params;
    std::vector<IterationRecord> trace;
};

// Conditional negative log-likelihood summed over all (x, y) pairs; each
// gold tuple of each image is one pair.
double nll_loss(const ModelParams &params, const EmbeddingSet &emb,
                const Dataset &dataset);

// Expected-minus-observed sufficient statistics, via forward-backward
// marginals.
GradientSet nll_gradient(const ModelParams &params, const EmbeddingSet &emb,
                         const Dataset &dataset);

// Single pass computing both.
double nll_loss_and_gradient(const ModelParams &params, const EmbeddingSet &emb,
                             const Dataset &dataset, GradientSet &gradient);

// Sum of singular values.
double nuclear_norm(const Mat &m);

// Singular value soft-thresholding: U max(S - tau, 0) V^T.
Mat prox_nuclear(const Mat &m, double tau);

// nll_loss + c1 * sum |W_t|_* + c2 * sum |Z_t|_*.
double objective(const ModelParams &params, const EmbeddingSet &emb,
                 const Dataset &dataset, const TrainConfig &config);

// Proximal gradient (forward-backward splitting) from zero initialization.
TrainResult fobos_train(const Dataset &dataset, const EmbeddingSet &emb,
                        const TrainConfig &config);

// Training log line: iteration, objective, loss, nuclear sum, ranks.
std::string format_record(const IterationRecord &record);

}  // namespace stcrf
