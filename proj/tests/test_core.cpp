#include <doctest.h>

#include "helpers.hpp"
#include "stcrf/core.hpp"

using namespace stcrf;

TEST_CASE("build_vocabulary orders by frequency") {
    const Vocabulary vocab =
        build_vocabulary("actor", {{"dog", "dog", "cat"}}, 2);
    REQUIRE(vocab.size() == 2);
    CHECK(vocab.token(0) == "dog");
    CHECK(vocab.token(1) == "cat");
    CHECK(vocab.lookup("dog") == 0);
    CHECK(vocab.lookup("cat") == 1);
}

TEST_CASE("build_vocabulary keeps everything when under the cap") {
    const Vocabulary vocab = build_vocabulary("actor", {{"a", "b"}}, 10);
    CHECK(vocab.size() == 2);
}

TEST_CASE("build_vocabulary breaks frequency ties lexicographically") {
    const Vocabulary vocab =
        build_vocabulary("actor", {{"x", "y", "x", "y", "z"}}, 2);
    REQUIRE(vocab.size() == 2);
    CHECK(vocab.token(0) == "x");
    CHECK(vocab.token(1) == "y");
}

TEST_CASE("build_vocabulary rejects an empty corpus") {
    CHECK_THROWS_AS(build_vocabulary("actor", {}, 5), std::invalid_argument);
}

TEST_CASE("build_vocabulary is deterministic") {
    const std::vector<std::vector<std::string>> corpus = {
        {"run", "dog", "park"}, {"run", "cat"}, {"swim", "dog"}};
    const Vocabulary a = build_vocabulary("x", corpus, 4);
    const Vocabulary b = build_vocabulary("x", corpus, 4);
    CHECK(a.tokens() == b.tokens());
}

TEST_CASE("vocabulary lookup and token are mutual inverses") {
    const Vocabulary vocab =
        build_vocabulary("loc", {{"park", "river", "park", "beach"}}, 10);
    for (int id = 0; id < vocab.size(); ++id)
        CHECK(vocab.lookup(vocab.token(id)) == id);
    CHECK(vocab.lookup("unknown") == -1);
    CHECK_THROWS_AS(vocab.token(vocab.size()), std::out_of_range);
}

TEST_CASE("vocabulary rejects duplicate tokens") {
    CHECK_THROWS_AS(Vocabulary("actor", {"dog", "dog"}), std::invalid_argument);
}

TEST_CASE("validate_dataset accepts a conforming dataset") {
    const ChainSpec spec = testing::make_spec({2, 3}, {2, 3}, 4);
    Dataset dataset{spec, {}};
    dataset.images.push_back({"img0", Vec::Zero(4), {{0, 1}}});
    dataset.images.push_back({"img1", Vec::Ones(4), {{1, 2}, {0, 0}}});
    CHECK(validate_dataset(dataset).empty());
}

TEST_CASE("validate_dataset flags a wrong-length feature vector") {
    const ChainSpec spec = testing::make_spec({2, 3}, {2, 3}, 4);
    Dataset dataset{spec, {}};
    dataset.images.push_back({"bad", Vec::Zero(3), {{0, 0}}});
    const auto report = validate_dataset(dataset);
    REQUIRE(report.size() == 1);
    CHECK(report[0].image_id == "bad");
    CHECK(report[0].field == "features");
}

TEST_CASE("validate_dataset flags a label id at the vocabulary boundary") {
    const ChainSpec spec = testing::make_spec({2, 3}, {2, 3}, 4);
    Dataset dataset{spec, {}};
    dataset.images.push_back({"img", Vec::Zero(4), {{2, 0}}});  // |L_0| = 2
    const auto report = validate_dataset(dataset);
    REQUIRE(report.size() == 1);
    CHECK(report[0].field == "gold_tuples");
}

TEST_CASE("validate_dataset flags wrong tuple arity and non-finite features") {
    const ChainSpec spec = testing::make_spec({2, 2}, {2, 2}, 2);
    Dataset dataset{spec, {}};
    Vec nan_features = Vec::Zero(2);
    nan_features(1) = std::nan("");
    dataset.images.push_back({"a", nan_features, {{0, 0}}});
    dataset.images.push_back({"b", Vec::Zero(2), {{0, 0, 0}}});
    const auto report = validate_dataset(dataset);
    CHECK(report.size() == 2);
}

TEST_CASE("ChainSpec constructor enforces invariants") {
    CHECK_THROWS_AS(ChainSpec({}, 4), std::invalid_argument);
    std::vector<ChainPosition> positions;
    positions.push_back({"a", testing::make_vocab("a", 2), 2});
    CHECK_THROWS_AS(ChainSpec(positions, 0), std::invalid_argument);
    positions[0].embedding_dim = 0;
    CHECK_THROWS_AS(ChainSpec(positions, 4), std::invalid_argument);
}
