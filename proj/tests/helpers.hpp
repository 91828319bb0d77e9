#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "stcrf/core.hpp"
#include "stcrf/model.hpp"

namespace stcrf::testing {

inline std::shared_ptr<Vocabulary> make_vocab(const std::string &type, int size) {
    std::vector<std::string> tokens;
    for (int i = 0; i < size; ++i) tokens.push_back(type + std::to_string(i));
    return std::make_shared<Vocabulary>(type, std::move(tokens));
}

inline ChainSpec make_spec(const std::vector<int> &labels, const std::vector<int> &dims,
                           int input_dim) {
    std::vector<ChainPosition> positions;
    for (std::size_t t = 0; t < labels.size(); ++t) {
        ChainPosition pos;
        pos.argument_type = "pos" + std::to_string(t);
        pos.vocab = make_vocab(pos.argument_type, labels[t]);
        pos.embedding_dim = dims[t];
        positions.push_back(std::move(pos));
    }
    return ChainSpec(std::move(positions), input_dim);
}

inline Mat random_matrix(std::mt19937 &rng, long rows, long cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat m(rows, cols);
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c) m(r, c) = normal(rng);
    return m;
}

inline Vec random_vector(std::mt19937 &rng, long size) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec v(size);
    for (long i = 0; i < size; ++i) v(i) = normal(rng);
    return v;
}

inline EmbeddingSet random_embeddings(const ChainSpec &spec, std::mt19937 &rng) {
    EmbeddingSet emb;
    for (int t = 0; t < spec.length(); ++t) {
        emb.V.push_back(
            random_matrix(rng, spec.num_labels(t), spec.position(t).embedding_dim));
        emb.source.push_back(EmbeddingSource::External);
    }
    return emb;
}

inline ModelParams random_params(const ChainSpec &spec, std::mt19937 &rng,
                                 double scale = 1.0) {
    ModelParams params = ModelParams::zeros(spec);
    for (int t = 0; t < spec.length(); ++t)
        params.W[t] = scale * random_matrix(rng, params.W[t].rows(), params.W[t].cols());
    for (int t = 0; t + 1 < spec.length(); ++t)
        params.Z[t] = scale * random_matrix(rng, params.Z[t].rows(), params.Z[t].cols());
    return params;
}

inline PotentialTables random_tables(const std::vector<int> &labels, std::mt19937 &rng) {
    PotentialTables tables;
    for (std::size_t t = 0; t < labels.size(); ++t)
        tables.unary.push_back(random_vector(rng, labels[t]));
    for (std::size_t t = 0; t + 1 < labels.size(); ++t)
        tables.binary.push_back(random_matrix(rng, labels[t], labels[t + 1]));
    return tables;
}

inline PotentialTables zero_tables(const std::vector<int> &labels) {
    PotentialTables tables;
    for (std::size_t t = 0; t < labels.size(); ++t)
        tables.unary.push_back(Vec::Zero(labels[t]));
    for (std::size_t t = 0; t + 1 < labels.size(); ++t)
        tables.binary.push_back(Mat::Zero(labels[t], labels[t + 1]));
    return tables;
}

}  // namespace stcrf::testing
