#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "stcrf/core.hpp"
#include "stcrf/inference.hpp"

namespace stcrf {

struct PredictionSet {
    std::string image_id;
    std::vector<ScoredSequence> top_k;  // scores non-increasing, tuples distinct
};

struct TypePrecision {
    std::string argument_type;
    double precision = 0.0;
    long predicted = 0;
    long matched = 0;
};

struct EvalReport {
    std::vector<TypePrecision> per_type;
    double mean_precision = 0.0;
};

enum class Averaging { Micro, Macro };

PredictionSet predict_topk(const ModelParams &params, const EmbeddingSet &emb,
                           const AnnotatedImage &image, int k);

// Union-of-top-k protocol: per image and type, the predicted set is the
// union of that type's arguments over the top-k tuples; an argument matches
// if any gold tuple of the image carries it at that position.
EvalReport per_type_precision(const std::vector<PredictionSet> &predictions,
                              const Dataset &gold, Averaging averaging = Averaging::Micro);

struct NamedModel {
    std::string name;
    ModelParams params;
    EmbeddingSet emb;
};

// Per-argument-type choice of the model with highest validation precision;
// ties go to the earlier model in list order.
std::map<std::string, std::string> combo_select(const std::vector<NamedModel> &models,
                                                const Dataset &validation, int k);

// Per-type union-of-top-k argument sets, each type served by its assigned
// model.
std::map<std::string, std::set<int>> combo_predict(
    const std::map<std::string, std::string> &assignment,
    const std::vector<NamedModel> &models, const ChainSpec &spec,
    const AnnotatedImage &image, int k);

// Copy with all binary matrices zeroed; decoding then factorizes into
// per-position unary argmax.
ModelParams independent_mode(const ModelParams &params);

std::string format_report(const EvalReport &report);

}  // namespace stcrf
