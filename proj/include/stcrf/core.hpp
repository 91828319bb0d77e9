#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace stcrf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error categories, mapped to distinct exit codes by the CLI.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A closed set of labels for one argument type. Ids are dense, 0..size()-1,
// in insertion order.
class Vocabulary {
  public:
    Vocabulary(std::string argument_type, std::vector<std::string> tokens);

    const std::string &argument_type() const { return argument_type_; }
    int size() const { return static_cast<int>(tokens_.size()); }
    const std::string &token(int id) const;
    // Returns -1 when the token is not in the vocabulary.
    int lookup(const std::string &token) const;
    const std::vector<std::string> &tokens() const { return tokens_; }

  private:
    std::string argument_type_;
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

// Most frequent max_size tokens, frequency-descending, ties broken
// lexicographically; ids assigned in that order.
Vocabulary build_vocabulary(const std::string &argument_type,
                            const std::vector<std::vector<std::string>> &corpus,
                            std::size_t max_size);

struct ChainPosition {
    std::string argument_type;
    std::shared_ptr<const Vocabulary> vocab;
    int embedding_dim = 0;
};

// Shape of the factorized chain model: ordered positions with their label
// vocabularies and embedding dimensions, plus the input feature dimension.
class ChainSpec {
  public:
    ChainSpec(std::vector<ChainPosition> positions, int input_dim);

    int length() const { return static_cast<int>(positions_.size()); }
    int input_dim() const { return input_dim_; }
    const ChainPosition &position(int t) const { return positions_.at(t); }
    const std::vector<ChainPosition> &positions() const { return positions_; }
    int num_labels(int t) const { return position(t).vocab->size(); }

  private:
    std::vector<ChainPosition> positions_;
    int input_dim_ = 0;
};

struct AnnotatedImage {
    std::string image_id;
    Vec features;
    // Each gold tuple is a label-id sequence of length spec.length().
    std::vector<std::vector<int>> gold_tuples;
};

struct Dataset {
    ChainSpec spec;
    std::vector<AnnotatedImage> images;
};

struct Violation {
    std::string image_id;
    std::string field;
    std::string message;
};

// Empty report iff every AnnotatedImage conforms to the spec.
std::vector<Violation> validate_dataset(const Dataset &dataset);

enum class EmbeddingSource { Indicator, Ser, External };

std::string to_string(EmbeddingSource source);
EmbeddingSource embedding_source_from_string(const std::string &name);

// Per-position label embedding matrices; row l of V[t] is the feature
// vector of label l at position t.
struct EmbeddingSet {
    std::vector<Mat> V;
    std::vector<EmbeddingSource> source;

    int dim(int t) const { return static_cast<int>(V.at(t).cols()); }
};

// Unary matrices W[t] (n_t x d) and binary matrices Z[t] (n_t x n_{t+1}).
struct ModelParams {
    std::vector<Mat> W;
    std::vector<Mat> Z;

    static ModelParams zeros(const ChainSpec &spec);
    bool all_finite() const;
};

// Shapes match ModelParams; used for loss gradients.
using GradientSet = ModelParams;

// Checks that embeddings and params are mutually consistent with spec;
// throws DimensionError naming the offending matrix.
void check_shapes(const ChainSpec &spec, const EmbeddingSet &emb);
void check_shapes(const ChainSpec &spec, const EmbeddingSet &emb,
                  const ModelParams &params);

}  // namespace stcrf
