#include <doctest.h>

#include <random>

#include "oracle.hpp"
#include "refmine/stats.hpp"

using namespace refmine;

namespace {

Corpus car_corpus() {
    return make_corpus({
        "Honda civic is cool",
        "Look at cheap Honda civic",
        "Honda accord rules",
        "A Honda accord 4 u!",
    });
}

Corpus random_corpus(unsigned seed, std::size_t numPosts, std::size_t vocab) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<std::size_t> len(1, 6);
    // skewed so some tokens co-occur often enough to matter
    std::geometric_distribution<std::size_t> pick(0.25);
    std::vector<std::string> lines;
    for (std::size_t p = 0; p < numPosts; ++p) {
        std::string line;
        std::size_t n = len(rng);
        for (std::size_t i = 0; i < n; ++i) {
            if (i) line += ' ';
            line += "w" + std::to_string(pick(rng) % vocab);
        }
        lines.push_back(line);
    }
    return make_corpus(lines);
}

}  // namespace

TEST_CASE("post-level counts use set semantics") {
    Corpus corpus = make_corpus({"ford ford focus", "focus focus"});
    auto stats = build_stats(corpus);
    CHECK(stats.postCount("ford") == 1);
    CHECK(stats.postCount("focus") == 2);
    CHECK(stats.pairPostCount("ford", "focus") == 1);
}

TEST_CASE("multi-token terms count posts containing every constituent") {
    Corpus corpus = make_corpus({"crown victoria lx", "victoria something",
                                 "crown else", "victoria crown split"});
    auto stats = build_stats(corpus);
    CHECK(stats.postCount("crown victoria") == 2);  // adjacency not required
    CHECK(stats.pairPostCount("crown victoria", "lx") == 1);
}

TEST_CASE("conditional probabilities match the worked car corpus") {
    auto corpus = car_corpus();
    auto stats = build_stats(corpus);
    CHECK(stats.postCount("honda") == 4);
    CHECK(stats.postCount("civic") == 2);
    CHECK(stats.pairPostCount("honda", "civic") == 2);
    CHECK(cond_prob(stats, "honda", "civic") == 1.0);
    CHECK(cond_prob(stats, "civic", "honda") == 0.5);
    CHECK(cond_prob(stats, "honda", "nowhere") == 0.0);
}

TEST_CASE("union counts cover posts with any parent term") {
    auto corpus = make_corpus({"camry le", "corolla le", "pathfinder le",
                               "camry alone", "odd one"});
    auto stats = build_stats(corpus);
    std::vector<std::string> parents{"camry", "corolla", "pathfinder"};
    CHECK(stats.unionPostCount(parents) == 4);
    CHECK(stats.unionPairPostCount(parents, "le") == 3);
    CHECK(union_cond_prob(stats, parents, "le") == 1.0);
    CHECK(union_cond_prob_reverse(stats, parents, "le") == 0.75);
    CHECK_THROWS_AS(stats.unionPostCount({}), std::invalid_argument);
}

TEST_CASE("ordered bigrams skip self-pairs and track first sighting") {
    Corpus corpus = make_corpus({"b a", "a a b", "a b"});
    auto stats = build_stats(corpus);
    CHECK(stats.bigramCount("a", "b") == 2);
    CHECK(stats.bigramCount("b", "a") == 1);
    CHECK(stats.bigramCount("a", "a") == 0);
    auto info = stats.orderedBigrams().at({"a", "b"});
    CHECK(info.first == std::pair<std::size_t, std::size_t>{1, 1});
    CHECK(make_bigrams(corpus) ==
          std::set<std::pair<std::string, std::string>>{{"a", "b"}, {"b", "a"}});
}

TEST_CASE("counts agree with direct scans on random corpora") {
    for (unsigned seed : {1u, 2u, 3u, 4u, 5u}) {
        Corpus corpus = random_corpus(seed, 40, 12);
        auto stats = build_stats(corpus);
        for (std::size_t a = 0; a < 12; ++a) {
            std::string x = "w" + std::to_string(a);
            CHECK(stats.postCount(x) == oracle::count_with(corpus, x));
            for (std::size_t b = 0; b < 12; ++b) {
                std::string y = "w" + std::to_string(b);
                CHECK(stats.pairPostCount(x, y) == oracle::count_with_both(corpus, x, y));
                CHECK(cond_prob(stats, x, y) ==
                      doctest::Approx(oracle::cond_prob(corpus, x, y)).epsilon(1e-12));
                // self-pairs are excluded from the bigram table by design
                if (a != b) {
                    CHECK(stats.bigramCount(x, y) == oracle::adjacency_count(corpus, x, y));
                }
            }
        }
        std::set<std::pair<std::string, std::string>> implPairs;
        for (const auto& [pair, info] : stats.orderedBigrams()) implPairs.insert(pair);
        CHECK(implPairs == oracle::adjacency(corpus));
    }
}

TEST_CASE("build_stats is identical for any thread count") {
    Corpus corpus = random_corpus(99, 200, 20);
    auto one = build_stats(corpus, 1);
    for (unsigned threads : {2u, 3u, 8u, 64u}) {
        auto many = build_stats(corpus, threads);
        CHECK(many.postings() == one.postings());
        REQUIRE(many.orderedBigrams().size() == one.orderedBigrams().size());
        for (const auto& [pair, info] : one.orderedBigrams()) {
            const auto& other = many.orderedBigrams().at(pair);
            CHECK(other.count == info.count);
            CHECK(other.first == info.first);
        }
    }
}

TEST_CASE("cond_prob identity P(x|x) = 1 whenever x occurs") {
    Corpus corpus = random_corpus(7, 60, 15);
    auto stats = build_stats(corpus);
    for (std::size_t a = 0; a < 15; ++a) {
        std::string x = "w" + std::to_string(a);
        if (stats.postCount(x) > 0) CHECK(cond_prob(stats, x, x) == 1.0);
    }
}
