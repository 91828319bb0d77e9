#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "stcrf/embeddings.hpp"
#include "stcrf/inference.hpp"

using namespace stcrf;
using namespace stcrf::testing;

TEST_CASE("log_partition of a single uniform position") {
    PotentialTables tables = zero_tables({2});
    CHECK(log_partition(tables) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("log_partition of zero tables counts sequences") {
    PotentialTables tables = zero_tables({3, 3});
    CHECK(log_partition(tables) == doctest::Approx(std::log(9.0)));
}

TEST_CASE("log_partition matches brute force on random instances") {
    std::mt19937 rng(42);
    PotentialTables tables = random_tables({4, 4, 4}, rng);
    double sum = 0.0;
    for (const auto &entry : brute_force(tables)) sum += std::exp(entry.score);
    CHECK(log_partition(tables) == doctest::Approx(std::log(sum)).epsilon(1e-10));
}

TEST_CASE("marginals of zero tables are uniform") {
    PotentialTables tables = zero_tables({3, 4});
    const MarginalSet m = marginals(tables);
    for (int l = 0; l < 3; ++l)
        CHECK(m.unary_marginals[0](l) == doctest::Approx(1.0 / 3.0));
    for (int l = 0; l < 4; ++l)
        CHECK(m.unary_marginals[1](l) == doctest::Approx(1.0 / 4.0));
}

TEST_CASE("marginals concentrate when one pair dominates") {
    PotentialTables tables = zero_tables({2, 2});
    tables.binary[0].setConstant(-1e4);
    tables.binary[0](1, 0) = 0.0;
    const MarginalSet m = marginals(tables);
    CHECK(m.pairwise_marginals[0](1, 0) >= 1.0 - 1e-6);
}

namespace {

MarginalSet brute_force_marginals(const PotentialTables &tables) {
    MarginalSet m;
    const int T = tables.length();
    m.unary_marginals.resize(T);
    for (int t = 0; t < T; ++t) m.unary_marginals[t] = Vec::Zero(tables.num_labels(t));
    m.pairwise_marginals.resize(T - 1);
    for (int t = 0; t + 1 < T; ++t)
        m.pairwise_marginals[t] = Mat::Zero(tables.num_labels(t), tables.num_labels(t + 1));

    const auto all = brute_force(tables);
    double z = 0.0;
    for (const auto &entry : all) z += std::exp(entry.score);
    m.log_partition = std::log(z);
    for (const auto &entry : all) {
        const double p = std::exp(entry.score) / z;
        for (int t = 0; t < T; ++t) m.unary_marginals[t](entry.labels[t]) += p;
        for (int t = 0; t + 1 < T; ++t)
            m.pairwise_marginals[t](entry.labels[t], entry.labels[t + 1]) += p;
    }
    return m;
}

}  // namespace

TEST_CASE("marginals match brute force and satisfy consistency invariants") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        std::uniform_int_distribution<int> t_dist(2, 4), l_dist(2, 6);
        std::vector<int> labels(t_dist(rng));
        for (auto &l : labels) l = l_dist(rng);
        const PotentialTables tables = random_tables(labels, rng);

        const MarginalSet exact = marginals(tables);
        const MarginalSet brute = brute_force_marginals(tables);
        CHECK(exact.log_partition == doctest::Approx(brute.log_partition).epsilon(1e-10));
        for (std::size_t t = 0; t < labels.size(); ++t) {
            CHECK((exact.unary_marginals[t] - brute.unary_marginals[t]).cwiseAbs().maxCoeff() <
                  1e-9);
            CHECK(exact.unary_marginals[t].sum() == doctest::Approx(1.0).epsilon(1e-9));
        }
        for (std::size_t t = 0; t + 1 < labels.size(); ++t) {
            CHECK((exact.pairwise_marginals[t] - brute.pairwise_marginals[t])
                      .cwiseAbs()
                      .maxCoeff() < 1e-9);
            // row/column sums reproduce adjacent unary marginals
            CHECK((exact.pairwise_marginals[t].rowwise().sum() - exact.unary_marginals[t])
                      .cwiseAbs()
                      .maxCoeff() < 1e-9);
            CHECK((exact.pairwise_marginals[t].colwise().sum().transpose() -
                   exact.unary_marginals[t + 1])
                      .cwiseAbs()
                      .maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("viterbi breaks ties toward the lexicographically smallest sequence") {
    PotentialTables tables = zero_tables({3, 3, 3});
    const ScoredSequence best = viterbi(tables);
    CHECK(best.labels == std::vector<int>{0, 0, 0});
    CHECK(best.score == 0.0);
}

TEST_CASE("viterbi follows dominant unary potentials") {
    PotentialTables tables = zero_tables({4, 4, 4});
    for (auto &u : tables.unary) u(2) = 5.0;
    CHECK(viterbi(tables).labels == std::vector<int>{2, 2, 2});
}

TEST_CASE("viterbi equals the brute-force argmax") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const PotentialTables tables = random_tables({3, 5, 4}, rng);
        const auto all = brute_force(tables);
        const ScoredSequence best = viterbi(tables);
        CHECK(best.labels == all[0].labels);
        CHECK(best.score == doctest::Approx(all[0].score).epsilon(1e-12));
    }
}

TEST_CASE("kbest with k=1 equals viterbi") {
    std::mt19937 rng(5);
    const PotentialTables tables = random_tables({4, 3, 5}, rng);
    const auto top = kbest(tables, 1);
    REQUIRE(top.size() == 1);
    CHECK(top[0].labels == viterbi(tables).labels);
}

TEST_CASE("kbest enumerates ties in lexicographic order") {
    PotentialTables tables = zero_tables({2, 2});
    const auto top = kbest(tables, 4);
    REQUIRE(top.size() == 4);
    CHECK(top[0].labels == std::vector<int>{0, 0});
    CHECK(top[1].labels == std::vector<int>{0, 1});
    CHECK(top[2].labels == std::vector<int>{1, 0});
    CHECK(top[3].labels == std::vector<int>{1, 1});
    for (const auto &entry : top) CHECK(entry.score == 0.0);
}

TEST_CASE("kbest matches the brute-force prefix") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const PotentialTables tables = random_tables({4, 4, 4}, rng);
        const auto all = brute_force(tables);
        const auto top = kbest(tables, 5);
        REQUIRE(top.size() == 5);
        for (int i = 0; i < 5; ++i) {
            CHECK(top[i].labels == all[i].labels);
            CHECK(top[i].score == doctest::Approx(all[i].score).epsilon(1e-10));
        }
    }
}

TEST_CASE("kbest rejects k = 0 and truncates to the sequence space") {
    PotentialTables tables = zero_tables({2, 2});
    CHECK_THROWS_AS(kbest(tables, 0), std::invalid_argument);
    CHECK(kbest(tables, 100).size() == 4);
}

TEST_CASE("kbest scores are non-increasing and sequences distinct") {
    std::mt19937 rng(23);
    const PotentialTables tables = random_tables({5, 5, 5}, rng);
    const auto top = kbest(tables, 10);
    for (std::size_t i = 1; i < top.size(); ++i) {
        CHECK(top[i - 1].score >= top[i].score);
        CHECK(top[i - 1].labels != top[i].labels);
    }
}

TEST_CASE("brute_force on a single position sorts by score") {
    PotentialTables tables;
    tables.unary.push_back((Vec(2) << 3, 1).finished());
    const auto all = brute_force(tables);
    REQUIRE(all.size() == 2);
    CHECK(all[0].labels == std::vector<int>{0});
    CHECK(all[0].score == 3.0);
    CHECK(all[1].score == 1.0);
}

TEST_CASE("brute_force rejects oversized state spaces") {
    PotentialTables tables = zero_tables({100, 100});
    CHECK_THROWS_AS(brute_force(tables, 1000), std::invalid_argument);
}

TEST_CASE("adding a constant to a unary table shifts log_partition only") {
    std::mt19937 rng(31);
    const PotentialTables tables = random_tables({3, 4, 3}, rng);
    PotentialTables shifted = tables;
    const double c = 1e3;
    shifted.unary[1].array() += c;

    CHECK(log_partition(shifted) ==
          doctest::Approx(log_partition(tables) + c).epsilon(1e-9));
    CHECK(viterbi(shifted).labels == viterbi(tables).labels);
    const MarginalSet a = marginals(tables), b = marginals(shifted);
    for (int t = 0; t < 3; ++t)
        CHECK((a.unary_marginals[t] - b.unary_marginals[t]).cwiseAbs().maxCoeff() < 1e-9);
    const auto ka = kbest(tables, 5), kb = kbest(shifted, 5);
    for (int i = 0; i < 5; ++i) CHECK(ka[i].labels == kb[i].labels);
}

TEST_CASE("conditional_prob is uniform under zero params and sums to one") {
    const ChainSpec spec = make_spec({4, 4, 4}, {2, 2, 2}, 3);
    std::mt19937 rng(13);
    const EmbeddingSet emb = random_embeddings(spec, rng);
    const ModelParams zero = ModelParams::zeros(spec);
    const Vec x = random_vector(rng, 3);
    CHECK(conditional_prob(zero, emb, x, {1, 2, 3}) == doctest::Approx(1.0 / 64.0));

    const ModelParams params = random_params(spec, rng);
    const PotentialTables tables = build_tables(params, emb, x);
    double total = 0.0;
    double z = 0.0;
    for (const auto &entry : brute_force(tables)) z += std::exp(entry.score);
    for (const auto &entry : brute_force(tables)) {
        total += conditional_prob(params, emb, x, entry.labels);
        CHECK(conditional_prob(params, emb, x, entry.labels) ==
              doctest::Approx(std::exp(entry.score) / z).epsilon(1e-9));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}
