#include "stcrf/inference.hpp"

#include <algorithm>
#include <cmath>

namespace stcrf {

namespace {

double logsumexp(const Vec &v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((v.array() - m).exp().sum());
}

std::vector<Vec> forward_messages(const PotentialTables &tables) {
    const int T = tables.length();
    std::vector<Vec> alpha(T);
    alpha[0] = tables.unary[0];
    for (int t = 1; t < T; ++t) {
        const int n = tables.num_labels(t);
        alpha[t] = Vec(n);
        for (int l = 0; l < n; ++l)
            alpha[t](l) = logsumexp(alpha[t - 1] + tables.binary[t - 1].col(l)) +
                          tables.unary[t](l);
    }
    return alpha;
}

std::vector<Vec> backward_messages(const PotentialTables &tables) {
    const int T = tables.length();
    std::vector<Vec> beta(T);
    beta[T - 1] = Vec::Zero(tables.num_labels(T - 1));
    for (int t = T - 2; t >= 0; --t) {
        const int n = tables.num_labels(t);
        beta[t] = Vec(n);
        for (int l = 0; l < n; ++l)
            beta[t](l) = logsumexp(tables.binary[t].row(l).transpose() +
                                   tables.unary[t + 1] + beta[t + 1]);
    }
    return beta;
}

bool sequence_less(const ScoredSequence &a, const ScoredSequence &b) {
    if (a.score != b.score) return a.score > b.score;
    return a.labels < b.labels;
}

}  // namespace

double log_partition(const PotentialTables &tables) {
    return logsumexp(forward_messages(tables).back());
}

MarginalSet marginals(const PotentialTables &tables) {
    const int T = tables.length();
    const auto alpha = forward_messages(tables);
    const auto beta = backward_messages(tables);
    MarginalSet result;
    result.log_partition = logsumexp(alpha[T - 1]);

    result.unary_marginals.resize(T);
    for (int t = 0; t < T; ++t)
        result.unary_marginals[t] =
            (alpha[t] + beta[t] - Vec::Constant(tables.num_labels(t), result.log_partition))
                .array()
                .exp();

    result.pairwise_marginals.resize(T - 1);
    for (int t = 0; t + 1 < T; ++t) {
        const int n = tables.num_labels(t);
        const int m = tables.num_labels(t + 1);
        Mat p(n, m);
        for (int l = 0; l < n; ++l)
            for (int r = 0; r < m; ++r)
                p(l, r) = std::exp(alpha[t](l) + tables.binary[t](l, r) +
                                   tables.unary[t + 1](r) + beta[t + 1](r) -
                                   result.log_partition);
        result.pairwise_marginals[t] = std::move(p);
    }
    return result;
}

ScoredSequence viterbi(const PotentialTables &tables) {
    const int T = tables.length();
    // delta[t](l): best suffix score starting at position t with label l.
    std::vector<Vec> delta(T);
    delta[T - 1] = tables.unary[T - 1];
    for (int t = T - 2; t >= 0; --t) {
        const int n = tables.num_labels(t);
        delta[t] = Vec(n);
        for (int l = 0; l < n; ++l)
            delta[t](l) = tables.unary[t](l) +
                          (tables.binary[t].row(l).transpose() + delta[t + 1]).maxCoeff();
    }

    ScoredSequence best;
    best.labels.resize(T);
    // Greedy left-to-right selection keeps the lexicographically smallest
    // maximizer: the suffix optimum at each step does not depend on how the
    // prefix tie was broken.
    {
        const double m = delta[0].maxCoeff();
        int l = 0;
        while (delta[0](l) != m) ++l;
        best.labels[0] = l;
        best.score = m;
    }
    for (int t = 1; t < T; ++t) {
        const Vec vals = tables.binary[t - 1].row(best.labels[t - 1]).transpose() + delta[t];
        const double m = vals.maxCoeff();
        int l = 0;
        while (vals(l) != m) ++l;
        best.labels[t] = l;
    }
    return best;
}

std::vector<ScoredSequence> kbest(const PotentialTables &tables, int k) {
    if (k < 1) throw std::invalid_argument("kbest: k must be >= 1");
    const int T = tables.length();

    // Per-state lists of the k best prefixes ending in that state, kept
    // sorted by (score desc, labels lex asc).
    std::vector<std::vector<ScoredSequence>> lists(tables.num_labels(0));
    for (int l = 0; l < tables.num_labels(0); ++l)
        lists[l] = {{{l}, tables.unary[0](l)}};

    for (int t = 1; t < T; ++t) {
        std::vector<std::vector<ScoredSequence>> next(tables.num_labels(t));
        for (int l = 0; l < tables.num_labels(t); ++l) {
            std::vector<ScoredSequence> candidates;
            for (int prev = 0; prev < tables.num_labels(t - 1); ++prev) {
                for (const auto &c : lists[prev]) {
                    ScoredSequence ext;
                    ext.labels = c.labels;
                    ext.labels.push_back(l);
                    ext.score = c.score + tables.binary[t - 1](prev, l) + tables.unary[t](l);
                    candidates.push_back(std::move(ext));
                }
            }
            std::sort(candidates.begin(), candidates.end(), sequence_less);
            if (static_cast<int>(candidates.size()) > k) candidates.resize(k);
            next[l] = std::move(candidates);
        }
        lists = std::move(next);
    }

    std::vector<ScoredSequence> merged;
    for (auto &list : lists)
        for (auto &c : list) merged.push_back(std::move(c));
    std::sort(merged.begin(), merged.end(), sequence_less);
    if (static_cast<int>(merged.size()) > k) merged.resize(k);
    return merged;
}

std::vector<ScoredSequence> brute_force(const PotentialTables &tables, std::size_t limit) {
    const int T = tables.length();
    std::size_t total = 1;
    for (int t = 0; t < T; ++t) {
        total *= static_cast<std::size_t>(tables.num_labels(t));
        if (total > limit)
            throw std::invalid_argument("brute_force: state space exceeds limit " +
                                        std::to_string(limit));
    }

    std::vector<ScoredSequence> all;
    all.reserve(total);
    std::vector<int> y(T, 0);
    while (true) {
        all.push_back({y, score(tables, y)});
        int t = T - 1;
        while (t >= 0 && ++y[t] == tables.num_labels(t)) y[t--] = 0;
        if (t < 0) break;
    }
    std::sort(all.begin(), all.end(), sequence_less);
    return all;
}

double conditional_prob(const ModelParams &params, const EmbeddingSet &emb, const Vec &x,
                        const std::vector<int> &y) {
    const PotentialTables tables = build_tables(params, emb, x);
    return std::exp(score(tables, y) - log_partition(tables));
}

}  // namespace stcrf
