#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "stcrf/core.hpp"
#include "stcrf/evaluation.hpp"
#include "stcrf/learning.hpp"

namespace stcrf {

// Parsed feature file: insertion-ordered ids plus id -> vector lookup.
struct FeatureTable {
    std::vector<std::string> ids;
    std::unordered_map<std::string, Vec> by_id;
    int dim = 0;
};

// Line-delimited JSON records {"id": ..., "features": [...]}.
FeatureTable load_features(const std::string &path);

struct AnnotationRecord {
    int line = 0;
    std::string image_id;
    std::vector<std::vector<std::string>> tuples;
};

// Line-delimited JSON records {"image_id": ..., "tuples": [[...], ...]}.
std::vector<AnnotationRecord> read_annotation_records(const std::string &path);

struct Exclusion {
    std::string image_id;
    std::string reason;
};

struct AnnotationLoad {
    Dataset dataset;
    std::vector<Exclusion> excluded;
};

// Joins annotations with features by id and maps tokens to label ids.
// Images lacking features or containing out-of-vocabulary tokens land in
// the exclusion report; wrong tuple arity is a hard error.
AnnotationLoad load_annotations(const std::string &path, const ChainSpec &spec,
                                const FeatureTable &features);

// Self-contained trained model: spec with inline vocabularies, embeddings,
// parameters, and an echo of the training configuration.
struct Model {
    ChainSpec spec;
    EmbeddingSet emb;
    ModelParams params;
    std::optional<TrainConfig> config;
};

inline constexpr int kModelFormatVersion = 1;

void save_model(const Model &model, const std::string &path);
Model load_model(const std::string &path);

// Writers for the same line-delimited formats the loaders read.
void write_features(const std::string &path, const Dataset &dataset);
void write_annotations(const std::string &path, const Dataset &dataset);

struct PredictedTuple {
    std::vector<std::string> tokens;
    double score = 0.0;
};

struct ImagePredictions {
    std::string image_id;
    std::vector<PredictedTuple> tuples;
};

void write_predictions(const std::string &path,
                       const std::vector<ImagePredictions> &predictions);
std::vector<ImagePredictions> read_predictions(const std::string &path);

void write_report(const std::string &path, const EvalReport &report);

}  // namespace stcrf
