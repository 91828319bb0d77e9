#include "stcrf/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace stcrf {

Vocabulary::Vocabulary(std::string argument_type, std::vector<std::string> tokens)
    : argument_type_(std::move(argument_type)), tokens_(std::move(tokens)) {
    for (int id = 0; id < static_cast<int>(tokens_.size()); ++id) {
        auto [it, inserted] = index_.emplace(tokens_[id], id);
        if (!inserted)
            throw std::invalid_argument("duplicate token in vocabulary '" +
                                        argument_type_ + "': " + tokens_[id]);
    }
}

const std::string &Vocabulary::token(int id) const {
    if (id < 0 || id >= size())
        throw std::out_of_range("label id " + std::to_string(id) +
                                " out of range for vocabulary '" + argument_type_ +
                                "' of size " + std::to_string(size()));
    return tokens_[id];
}

int Vocabulary::lookup(const std::string &token) const {
    auto it = index_.find(token);
    return it == index_.end() ? -1 : it->second;
}

Vocabulary build_vocabulary(const std::string &argument_type,
                            const std::vector<std::vector<std::string>> &corpus,
                            std::size_t max_size) {
    if (corpus.empty())
        throw std::invalid_argument("build_vocabulary: empty corpus");
    std::map<std::string, std::size_t> counts;
    for (const auto &sentence : corpus)
        for (const auto &token : sentence) ++counts[token];
    if (counts.empty())
        throw std::invalid_argument("build_vocabulary: corpus contains no tokens");

    std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
    std::stable_sort(items.begin(), items.end(), [](const auto &a, const auto &b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (items.size() > max_size) items.resize(max_size);

    std::vector<std::string> tokens;
    tokens.reserve(items.size());
    for (const auto &[token, count] : items) tokens.push_back(token);
    return Vocabulary(argument_type, std::move(tokens));
}

ChainSpec::ChainSpec(std::vector<ChainPosition> positions, int input_dim)
    : positions_(std::move(positions)), input_dim_(input_dim) {
    if (positions_.empty())
        throw std::invalid_argument("ChainSpec: at least one position required");
    if (input_dim_ < 1)
        throw std::invalid_argument("ChainSpec: input_dim must be >= 1");
    for (const auto &pos : positions_) {
        if (!pos.vocab || pos.vocab->size() == 0)
            throw std::invalid_argument("ChainSpec: position '" + pos.argument_type +
                                        "' has an empty vocabulary");
        if (pos.embedding_dim < 1)
            throw std::invalid_argument("ChainSpec: position '" + pos.argument_type +
                                        "' has embedding_dim < 1");
    }
}

std::vector<Violation> validate_dataset(const Dataset &dataset) {
    std::vector<Violation> report;
    const ChainSpec &spec = dataset.spec;
    for (const auto &image : dataset.images) {
        if (image.features.size() != spec.input_dim()) {
            report.push_back({image.image_id, "features",
                              "length " + std::to_string(image.features.size()) +
                                  " != input_dim " + std::to_string(spec.input_dim())});
        } else if (!image.features.allFinite()) {
            report.push_back({image.image_id, "features", "non-finite entry"});
        }
        for (const auto &tuple : image.gold_tuples) {
            if (static_cast<int>(tuple.size()) != spec.length()) {
                report.push_back({image.image_id, "gold_tuples",
                                  "tuple arity " + std::to_string(tuple.size()) +
                                      " != chain length " + std::to_string(spec.length())});
                continue;
            }
            for (int t = 0; t < spec.length(); ++t) {
                if (tuple[t] < 0 || tuple[t] >= spec.num_labels(t))
                    report.push_back({image.image_id, "gold_tuples",
                                      "label id " + std::to_string(tuple[t]) +
                                          " out of range at position " +
                                          spec.position(t).argument_type});
            }
        }
    }
    return report;
}

std::string to_string(EmbeddingSource source) {
    switch (source) {
        case EmbeddingSource::Indicator: return "indicator";
        case EmbeddingSource::Ser: return "ser";
        case EmbeddingSource::External: return "external";
    }
    throw std::logic_error("unknown embedding source");
}

EmbeddingSource embedding_source_from_string(const std::string &name) {
    if (name == "indicator") return EmbeddingSource::Indicator;
    if (name == "ser") return EmbeddingSource::Ser;
    if (name == "external") return EmbeddingSource::External;
    throw std::invalid_argument("unknown embedding source: " + name);
}

ModelParams ModelParams::zeros(const ChainSpec &spec) {
    ModelParams params;
    for (int t = 0; t < spec.length(); ++t)
        params.W.push_back(Mat::Zero(spec.position(t).embedding_dim, spec.input_dim()));
    for (int t = 0; t + 1 < spec.length(); ++t)
        params.Z.push_back(Mat::Zero(spec.position(t).embedding_dim,
                                     spec.position(t + 1).embedding_dim));
    return params;
}

bool ModelParams::all_finite() const {
    for (const auto &m : W)
        if (!m.allFinite()) return false;
    for (const auto &m : Z)
        if (!m.allFinite()) return false;
    return true;
}

namespace {

void check_dims(const Mat &m, long rows, long cols, const std::string &name) {
    if (m.rows() != rows || m.cols() != cols)
        throw DimensionError(name + ": expected " + std::to_string(rows) + "x" +
                             std::to_string(cols) + ", got " + std::to_string(m.rows()) +
                             "x" + std::to_string(m.cols()));
}

}  // namespace

void check_shapes(const ChainSpec &spec, const EmbeddingSet &emb) {
    if (static_cast<int>(emb.V.size()) != spec.length())
        throw DimensionError("EmbeddingSet: expected " + std::to_string(spec.length()) +
                             " matrices, got " + std::to_string(emb.V.size()));
    for (int t = 0; t < spec.length(); ++t)
        check_dims(emb.V[t], spec.num_labels(t), spec.position(t).embedding_dim,
                   "V[" + spec.position(t).argument_type + "]");
}

void check_shapes(const ChainSpec &spec, const EmbeddingSet &emb,
                  const ModelParams &params) {
    check_shapes(spec, emb);
    if (static_cast<int>(params.W.size()) != spec.length())
        throw DimensionError("ModelParams: expected " + std::to_string(spec.length()) +
                             " unary matrices, got " + std::to_string(params.W.size()));
    if (static_cast<int>(params.Z.size()) != spec.length() - 1)
        throw DimensionError("ModelParams: expected " + std::to_string(spec.length() - 1) +
                             " binary matrices, got " + std::to_string(params.Z.size()));
    for (int t = 0; t < spec.length(); ++t)
        check_dims(params.W[t], spec.position(t).embedding_dim, spec.input_dim(),
                   "W[" + spec.position(t).argument_type + "]");
    for (int t = 0; t + 1 < spec.length(); ++t)
        check_dims(params.Z[t], spec.position(t).embedding_dim,
                   spec.position(t + 1).embedding_dim,
                   "Z[" + spec.position(t).argument_type + "]");
}

}  // namespace stcrf
