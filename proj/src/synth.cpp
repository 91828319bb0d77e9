#include "stcrf/synth.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "stcrf/model.hpp"

namespace stcrf {

namespace {

int pick(const std::vector<int> &values, int t, const char *what) {
    if (values.size() == 1) return values[0];
    if (t < static_cast<int>(values.size())) return values[t];
    throw std::invalid_argument(std::string("SynthConfig: ") + what +
                                " must have 1 or chain_length entries");
}

}  // namespace

int SynthConfig::labels_at(int t) const { return pick(label_counts, t, "label_counts"); }
int SynthConfig::dims_at(int t) const { return pick(embedding_dims, t, "embedding_dims"); }

void SynthConfig::validate() const {
    if (chain_length < 1)
        throw std::invalid_argument("SynthConfig: chain_length must be >= 1");
    if (label_counts.empty() || embedding_dims.empty())
        throw std::invalid_argument("SynthConfig: label_counts and embedding_dims required");
    if (input_dim < 1) throw std::invalid_argument("SynthConfig: input_dim must be >= 1");
    if (samples < 1) throw std::invalid_argument("SynthConfig: samples must be >= 1");
    if (test_samples < 0)
        throw std::invalid_argument("SynthConfig: test_samples must be >= 0");
    if (rank < 0) throw std::invalid_argument("SynthConfig: rank must be >= 0");
    if (!(noise >= 0.0) || !(score_scale >= 0.0))
        throw std::invalid_argument("SynthConfig: noise and score_scale must be >= 0");

    double state_space = 1.0;
    for (int t = 0; t < chain_length; ++t) {
        if (labels_at(t) < 1 || dims_at(t) < 1)
            throw std::invalid_argument("SynthConfig: label counts and dims must be >= 1");
        if (rank > std::min(dims_at(t), input_dim))
            throw std::invalid_argument("SynthConfig: rank exceeds min(n_t, d)");
        if (t + 1 < chain_length && rank > std::min(dims_at(t), dims_at(t + 1)))
            throw std::invalid_argument("SynthConfig: rank exceeds min(n_t, n_{t+1})");
        state_space *= labels_at(t);
        if (state_space > 1e6)
            throw std::invalid_argument(
                "SynthConfig: state space too large for exact sampling by enumeration");
    }
}

namespace {

Mat gaussian(std::mt19937 &rng, long rows, long cols, double stddev) {
    std::normal_distribution<double> normal(0.0, stddev);
    Mat m(rows, cols);
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c) m(r, c) = normal(rng);
    return m;
}

// Rank-r product scaled so bilinear scores through unit-scale embeddings
// and inputs come out with standard deviation ~ scale.
Mat low_rank(std::mt19937 &rng, long rows, long cols, int rank, double scale) {
    if (rank == 0 || scale == 0.0) return Mat::Zero(rows, cols);
    const Mat a = gaussian(rng, rows, rank, 1.0);
    const Mat b = gaussian(rng, rank, cols, 1.0);
    return (scale / std::sqrt(static_cast<double>(rank))) * (a * b);
}

std::vector<int> sample_tuple(const PotentialTables &tables, std::mt19937 &rng) {
    const int T = tables.length();
    std::vector<int> sizes(T);
    std::size_t total = 1;
    for (int t = 0; t < T; ++t) {
        sizes[t] = tables.num_labels(t);
        total *= static_cast<std::size_t>(sizes[t]);
    }

    std::vector<double> scores;
    scores.reserve(total);
    std::vector<int> y(T, 0);
    double max_score = -std::numeric_limits<double>::infinity();
    while (true) {
        const double s = score(tables, y);
        scores.push_back(s);
        max_score = std::max(max_score, s);
        int t = T - 1;
        while (t >= 0 && ++y[t] == sizes[t]) y[t--] = 0;
        if (t < 0) break;
    }
    for (double &s : scores) s = std::exp(s - max_score);
    std::discrete_distribution<std::size_t> dist(scores.begin(), scores.end());
    std::size_t index = dist(rng);

    std::vector<int> tuple(T);
    for (int t = T - 1; t >= 0; --t) {
        tuple[t] = static_cast<int>(index % sizes[t]);
        index /= sizes[t];
    }
    return tuple;
}

AnnotatedImage make_sample(const std::string &id, const Model &model,
                           const SynthConfig &config, std::mt19937 &rng) {
    const int d = config.input_dim;
    Vec x(d);
    {
        std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
        for (int i = 0; i < d; ++i) x(i) = normal(rng);
    }
    const PotentialTables tables = build_tables(model.params, model.emb, x);
    AnnotatedImage image;
    image.image_id = id;
    image.gold_tuples.push_back(sample_tuple(tables, rng));
    if (config.noise > 0.0) {
        std::normal_distribution<double> normal(0.0,
                                                config.noise / std::sqrt(static_cast<double>(d)));
        for (int i = 0; i < d; ++i) x(i) += normal(rng);
    }
    image.features = std::move(x);
    return image;
}

std::string pad_index(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06d", i);
    return buf;
}

}  // namespace

SynthOutput generate_synthetic(const SynthConfig &config) {
    config.validate();
    std::mt19937 rng(config.seed);
    const int T = config.chain_length;

    static const char *kTripleNames[3] = {"locative", "predicate", "actor"};
    std::vector<ChainPosition> positions;
    for (int t = 0; t < T; ++t) {
        ChainPosition pos;
        pos.argument_type = T == 3 ? kTripleNames[t] : "pos" + std::to_string(t);
        std::vector<std::string> tokens;
        for (int l = 0; l < config.labels_at(t); ++l)
            tokens.push_back(pos.argument_type + "_" + pad_index(l));
        pos.vocab = std::make_shared<Vocabulary>(pos.argument_type, std::move(tokens));
        pos.embedding_dim = config.dims_at(t);
        positions.push_back(std::move(pos));
    }
    ChainSpec spec(std::move(positions), config.input_dim);

    EmbeddingSet emb;
    for (int t = 0; t < T; ++t) {
        const int n = config.dims_at(t);
        emb.V.push_back(
            gaussian(rng, config.labels_at(t), n, 1.0 / std::sqrt(static_cast<double>(n))));
        emb.source.push_back(EmbeddingSource::External);
    }

    ModelParams params;
    for (int t = 0; t < T; ++t)
        params.W.push_back(low_rank(rng, config.dims_at(t), config.input_dim, config.rank,
                                    config.score_scale));
    for (int t = 0; t + 1 < T; ++t)
        params.Z.push_back(low_rank(rng, config.dims_at(t), config.dims_at(t + 1),
                                    config.rank, config.score_scale));

    Model true_model{std::move(spec), std::move(emb), std::move(params), std::nullopt};

    Dataset train{true_model.spec, {}};
    for (int i = 0; i < config.samples; ++i)
        train.images.push_back(make_sample("synth" + pad_index(i), true_model, config, rng));

    Dataset test{true_model.spec, {}};
    for (int i = 0; i < config.test_samples; ++i)
        test.images.push_back(
            make_sample("synthtest" + pad_index(i), true_model, config, rng));

    return SynthOutput{std::move(true_model), std::move(train), std::move(test)};
}

}  // namespace stcrf
