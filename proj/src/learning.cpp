#include "stcrf/learning.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "stcrf/inference.hpp"
#include "stcrf/model.hpp"

namespace stcrf {

void TrainConfig::validate() const {
    if (!(c1 >= 0.0) || !(c2 >= 0.0))
        throw std::invalid_argument("TrainConfig: c1 and c2 must be >= 0");
    if (!(base_step > 0.0) || !std::isfinite(base_step))
        throw std::invalid_argument("TrainConfig: base_step must be positive and finite");
    if (max_iter < 1) throw std::invalid_argument("TrainConfig: max_iter must be >= 1");
    if (!(tolerance >= 0.0))
        throw std::invalid_argument("TrainConfig: tolerance must be >= 0");
}

namespace {

std::size_t count_pairs(const Dataset &dataset) {
    std::size_t pairs = 0;
    for (const auto &image : dataset.images) pairs += image.gold_tuples.size();
    return pairs;
}

void require_nonempty(const Dataset &dataset) {
    if (count_pairs(dataset) == 0)
        throw std::invalid_argument("dataset contains no (x, y) training pairs");
}

}  // namespace

double nll_loss(const ModelParams &params, const EmbeddingSet &emb,
                const Dataset &dataset) {
    require_nonempty(dataset);
    check_shapes(dataset.spec, emb, params);
    const int T = dataset.spec.length();

    PotentialTables tables;
    tables.binary.reserve(T - 1);
    for (int t = 0; t + 1 < T; ++t) tables.binary.push_back(binary_table(params, emb, t));

    double loss = 0.0;
    for (const auto &image : dataset.images) {
        if (image.gold_tuples.empty()) continue;
        tables.unary.clear();
        for (int t = 0; t < T; ++t)
            tables.unary.push_back(unary_table(params, emb, image.features, t));
        const double log_z = log_partition(tables);
        for (const auto &y : image.gold_tuples) loss += log_z - score(tables, y);
    }
    return loss;
}

double nll_loss_and_gradient(const ModelParams &params, const EmbeddingSet &emb,
                             const Dataset &dataset, GradientSet &gradient) {
    require_nonempty(dataset);
    check_shapes(dataset.spec, emb, params);
    const ChainSpec &spec = dataset.spec;
    const int T = spec.length();

    gradient = GradientSet::zeros(spec);

    PotentialTables tables;
    tables.binary.reserve(T - 1);
    for (int t = 0; t + 1 < T; ++t) tables.binary.push_back(binary_table(params, emb, t));

    double loss = 0.0;
    for (const auto &image : dataset.images) {
        if (image.gold_tuples.empty()) continue;
        tables.unary.clear();
        for (int t = 0; t < T; ++t)
            tables.unary.push_back(unary_table(params, emb, image.features, t));

        // Marginals do not depend on the gold tuple, so one forward-backward
        // pass serves every (x, y) pair of this image.
        const MarginalSet m = marginals(tables);
        const double num_tuples = static_cast<double>(image.gold_tuples.size());

        for (const auto &y : image.gold_tuples) loss += m.log_partition - score(tables, y);

        for (int t = 0; t < T; ++t) {
            Vec expected = emb.V[t].transpose() * m.unary_marginals[t];
            Vec observed = Vec::Zero(spec.position(t).embedding_dim);
            for (const auto &y : image.gold_tuples) observed += emb.V[t].row(y[t]);
            gradient.W[t].noalias() +=
                (expected * num_tuples - observed) * image.features.transpose();
        }
        for (int t = 0; t + 1 < T; ++t) {
            Mat expected =
                emb.V[t].transpose() * m.pairwise_marginals[t] * emb.V[t + 1];
            gradient.Z[t].noalias() += expected * num_tuples;
            for (const auto &y : image.gold_tuples)
                gradient.Z[t].noalias() -=
                    emb.V[t].row(y[t]).transpose() * emb.V[t + 1].row(y[t + 1]);
        }
    }
    return loss;
}

GradientSet nll_gradient(const ModelParams &params, const EmbeddingSet &emb,
                         const Dataset &dataset) {
    GradientSet gradient;
    nll_loss_and_gradient(params, emb, dataset, gradient);
    return gradient;
}

double nuclear_norm(const Mat &m) {
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues().sum();
}

Mat prox_nuclear(const Mat &m, double tau) {
    if (tau < 0.0) throw std::invalid_argument("prox_nuclear: tau must be >= 0");
    if (tau == 0.0) return m;
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vec shrunk = (svd.singularValues().array() - tau).max(0.0);
    return svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
}

double objective(const ModelParams &params, const EmbeddingSet &emb,
                 const Dataset &dataset, const TrainConfig &config) {
    double reg = 0.0;
    for (const auto &w : params.W) reg += config.c1 * nuclear_norm(w);
    for (const auto &z : params.Z) reg += config.c2 * nuclear_norm(z);
    return nll_loss(params, emb, dataset) + reg;
}

TrainResult fobos_train(const Dataset &dataset, const EmbeddingSet &emb,
                        const TrainConfig &config) {
    config.validate();
    require_nonempty(dataset);
    check_shapes(dataset.spec, emb);

    TrainResult result;
    result.params = ModelParams::zeros(dataset.spec);
    GradientSet gradient;
    double prev_objective = 0.0;

    for (int iter = 1; iter <= config.max_iter; ++iter) {
        const double step = config.step_schedule == StepSchedule::Constant
                                ? config.base_step
                                : config.base_step / std::sqrt(static_cast<double>(iter));

        nll_loss_and_gradient(result.params, emb, dataset, gradient);
        for (std::size_t t = 0; t < result.params.W.size(); ++t) {
            result.params.W[t] -= step * gradient.W[t];
            result.params.W[t] = prox_nuclear(result.params.W[t], step * config.c1);
        }
        for (std::size_t t = 0; t < result.params.Z.size(); ++t) {
            result.params.Z[t] -= step * gradient.Z[t];
            result.params.Z[t] = prox_nuclear(result.params.Z[t], step * config.c2);
        }

        IterationRecord record;
        record.iteration = iter;
        record.loss = nll_loss(result.params, emb, dataset);
        record.nuclear_sum = 0.0;
        double reg = 0.0;
        const RankReport ranks = rank_report(result.params, 1e-8);
        for (std::size_t t = 0; t < result.params.W.size(); ++t) {
            record.nuclear_sum += ranks.unary[t].nuclear_norm;
            reg += config.c1 * ranks.unary[t].nuclear_norm;
            record.unary_ranks.push_back(ranks.unary[t].effective_rank);
        }
        for (std::size_t t = 0; t < result.params.Z.size(); ++t) {
            record.nuclear_sum += ranks.binary[t].nuclear_norm;
            reg += config.c2 * ranks.binary[t].nuclear_norm;
            record.binary_ranks.push_back(ranks.binary[t].effective_rank);
        }
        record.objective = record.loss + reg;
        if (!std::isfinite(record.objective))
            throw NumericalError("fobos_train: non-finite objective at iteration " +
                                 std::to_string(iter) + " (step size too large?)");
        result.trace.push_back(record);

        if (config.tolerance > 0.0 && iter > 1) {
            const double change = std::abs(record.objective - prev_objective) /
                                  std::max(1.0, std::abs(prev_objective));
            if (change < config.tolerance) break;
        }
        prev_objective = record.objective;
    }
    return result;
}

std::string format_record(const IterationRecord &record) {
    std::ostringstream out;
    out.precision(12);
    out << "iter=" << record.iteration << " objective=" << record.objective
        << " loss=" << record.loss << " nuclear=" << record.nuclear_sum << " ranksW=";
    for (std::size_t i = 0; i < record.unary_ranks.size(); ++i)
        out << (i ? "," : "") << record.unary_ranks[i];
    out << " ranksZ=";
    for (std::size_t i = 0; i < record.binary_ranks.size(); ++i)
        out << (i ? "," : "") << record.binary_ranks[i];
    return out.str();
}

}  // namespace stcrf
