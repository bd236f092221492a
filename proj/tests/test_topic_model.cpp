#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "edascope/error.hpp"
#include "edascope/synthetic.hpp"
#include "edascope/topic_model.hpp"
#include "edascope/util.hpp"

using namespace edascope;

namespace {

std::size_t overlap(const std::vector<TokenId>& a, const std::vector<TokenId>& b) {
    const std::set<TokenId> sa(a.begin(), a.end());
    std::size_t n = 0;
    for (auto t : b) n += sa.count(t);
    return n;
}

// Best one-to-one alignment of learned topics to planted topics by top-n
// overlap; returns per-planted-topic overlap counts.
std::vector<std::size_t> aligned_overlaps(const TopicModel& m, const PlantedTopics& planted, std::size_t n) {
    std::vector<std::vector<double>> w(planted.K, std::vector<double>(m.K));
    for (std::size_t p = 0; p < planted.K; ++p) {
        for (std::size_t k = 0; k < m.K; ++k) w[p][k] = static_cast<double>(overlap(planted.top_tokens(p, n), m.top_tokens(k, n)));
    }
    const auto match = max_weight_assignment(w);
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < planted.K; ++p) out.push_back(static_cast<std::size_t>(w[p][match[p]]));
    return out;
}

template <typename F>
void expect_error(ErrorCode code, F&& f) {
    try {
        f();
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == code);
    }
}

}  // namespace

TEST_CASE("assignment solver agrees with exhaustive search") {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.below(4);
        const std::size_t m = n + rng.below(3);
        std::vector<std::vector<double>> w(n, std::vector<double>(m));
        for (auto& row : w) {
            for (auto& x : row) x = static_cast<double>(rng.below(10));
        }
        const auto got = max_weight_assignment(w);
        double got_total = 0.0;
        std::set<std::size_t> cols;
        for (std::size_t i = 0; i < n; ++i) {
            got_total += w[i][got[i]];
            cols.insert(got[i]);
        }
        CHECK(cols.size() == n);
        std::vector<std::size_t> perm(m);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        double best = -1.0;
        do {
            double t = 0.0;
            for (std::size_t i = 0; i < n; ++i) t += w[i][perm[i]];
            best = std::max(best, t);
        } while (std::next_permutation(perm.begin(), perm.end()));
        CHECK(got_total == best);
    }
}

TEST_CASE("K=1 reproduces smoothed corpus frequencies") {
    const std::vector<std::vector<TokenId>> docs = {{0, 1, 1}, {2, 1}, {}, {0}};
    LdaParams p;
    p.topics = 1;
    p.iterations = 5;
    const auto m = train_lda(docs, 4, p);
    // counts: 0->2, 1->3, 2->1, 3->0 of 6 tokens.
    const double counts[] = {2, 3, 1, 0};
    for (TokenId w = 0; w < 4; ++w) CHECK(std::abs(m.p(0, w) - (counts[w] + 0.01) / (6 + 4 * 0.01)) < 1e-12);
}

TEST_CASE("phi rows are normalized and strictly positive") {
    PlantedTopicSpec spec;
    spec.documents = 60;
    spec.vocabulary = 40;
    const auto planted = plant_topic_corpus(spec);
    LdaParams p;
    p.iterations = 30;
    const auto m = train_lda(planted.docs, planted.V, p);
    for (std::size_t k = 0; k < m.K; ++k) {
        double s = 0.0;
        for (TokenId w = 0; w < m.V; ++w) {
            CHECK(m.p(k, w) > 0.0);
            s += m.p(k, w);
        }
        CHECK(std::abs(s - 1.0) < 1e-9);
    }
}

TEST_CASE("two planted disjoint topics are recovered") {
    PlantedTopicSpec spec;
    spec.documents = 200;
    spec.vocabulary = 100;
    spec.topics = 2;
    spec.seed = 3;
    const auto planted = plant_topic_corpus(spec);
    LdaParams p;
    p.topics = 2;
    p.iterations = 300;
    p.seed = 5;
    const auto m = train_lda(planted.docs, planted.V, p);
    for (auto o : aligned_overlaps(m, planted, 10)) CHECK(o >= 8);
}

TEST_CASE("seed boost 1 is bit-identical to plain LDA") {
    PlantedTopicSpec spec;
    spec.documents = 50;
    spec.vocabulary = 40;
    const auto planted = plant_topic_corpus(spec);
    LdaParams p;
    p.iterations = 40;
    p.seed = 9;
    const auto plain = train_lda(planted.docs, planted.V, p);
    const auto guided = train_guided_lda(planted.docs, planted.V, {{0, 1}, {10, 11}, {20}, {30}}, 1.0, p);
    CHECK(plain.phi == guided.phi);
}

TEST_CASE("guided LDA pins every seed token to its topic") {
    const auto planted = plant_topic_corpus({});
    std::vector<std::vector<TokenId>> seeds;
    for (std::size_t k = 0; k < planted.K; ++k) seeds.push_back(planted.top_tokens(k, 5));
    LdaParams p;
    p.iterations = 200;
    p.seed = 7;
    const auto m = train_guided_lda(planted.docs, planted.V, seeds, 10.0, p);
    for (std::size_t k = 0; k < seeds.size(); ++k) {
        for (auto w : seeds[k]) {
            std::size_t best = 0;
            for (std::size_t j = 1; j < m.K; ++j) {
                if (m.p(j, w) > m.p(best, w)) best = j;
            }
            CHECK(best == k);
        }
    }
    // Seeded topics line up with planted topics by index.
    for (std::size_t k = 0; k < planted.K; ++k) CHECK(overlap(planted.top_tokens(k, 10), m.top_tokens(k, 10)) >= 6);
}

TEST_CASE("hyperparameter and seed validation") {
    const std::vector<std::vector<TokenId>> docs = {{0, 1}};
    LdaParams p;
    p.topics = 0;
    expect_error(ErrorCode::InvalidHyperparameter, [&] { train_lda(docs, 2, p); });
    p = {};
    p.beta = 0.0;
    expect_error(ErrorCode::InvalidHyperparameter, [&] { train_lda(docs, 2, p); });
    p = {};
    p.alpha = -1.0;  // non-positive alpha selects the default 50/K
    p.iterations = 0;
    expect_error(ErrorCode::InvalidHyperparameter, [&] { train_lda(docs, 2, p); });
    p = {};
    p.iterations = 2;
    expect_error(ErrorCode::SeedConflict, [&] { train_guided_lda(docs, 2, {{0}, {0}}, 10.0, p); });
    expect_error(ErrorCode::InvalidArgument, [&] { train_lda({{5}}, 2, p); });
}

TEST_CASE("training is reproducible and differs across seeds") {
    PlantedTopicSpec spec;
    spec.documents = 40;
    spec.vocabulary = 30;
    const auto planted = plant_topic_corpus(spec);
    LdaParams p;
    p.iterations = 20;
    p.seed = 1;
    const auto a = train_lda(planted.docs, planted.V, p);
    const auto b = train_lda(planted.docs, planted.V, p);
    CHECK(a.phi == b.phi);
    p.seed = 2;
    CHECK(train_lda(planted.docs, planted.V, p).phi != a.phi);
}

TEST_CASE("infer_mixture") {
    TopicModel m;
    m.K = 3;
    m.V = 6;
    m.phi = {0.45, 0.45, 0.025, 0.025, 0.025, 0.025,  //
             0.025, 0.025, 0.45, 0.45, 0.025, 0.025,  //
             0.025, 0.025, 0.025, 0.025, 0.45, 0.45};
    const auto mix = infer_mixture({4, 5, 4, 4}, m);
    CHECK(mix[2] >= 0.9);
    CHECK(std::abs(std::accumulate(mix.begin(), mix.end(), 0.0) - 1.0) < 1e-9);

    const auto empty = infer_mixture({}, m);
    for (double x : empty) CHECK(x == doctest::Approx(1.0 / 3.0));

    const std::vector<TokenId> doc = {0, 2, 3, 4, 1};
    std::vector<TokenId> doubled = doc;
    doubled.insert(doubled.end(), doc.begin(), doc.end());
    const auto a = infer_mixture(doc, m);
    const auto b = infer_mixture(doubled, m);
    for (std::size_t k = 0; k < 3; ++k) CHECK(std::abs(a[k] - b[k]) < 1e-6);
}

TEST_CASE("topic types follow seed overlap") {
    TopicModel m;
    m.K = 4;
    m.V = 8;
    m.phi.assign(32, 0.02);
    // topic k favors tokens 2k, 2k+1.
    for (std::size_t k = 0; k < 4; ++k) m.phi[k * 8 + 2 * k] = m.phi[k * 8 + 2 * k + 1] = 0.38;
    // Type seeds: preparation -> topic 2, modeling -> topic 0, evaluation -> 3, visualization -> 1.
    assign_topic_types(m, {{4, 5}, {0, 1}, {6, 7}, {2, 3}}, 2);
    CHECK(m.topic_types == std::vector<EdaType>{EdaType::Modeling, EdaType::Visualization, EdaType::Preparation,
                                                EdaType::Evaluation});
    // Extra topics stay Unknown.
    TopicModel wide = m;
    wide.K = 5;
    wide.phi.resize(40, 0.125);
    assign_topic_types(wide, {{4, 5}, {0, 1}, {6, 7}, {2, 3}}, 2);
    CHECK(wide.topic_types[4] == EdaType::Unknown);
}

TEST_CASE("model file round trip") {
    PlantedTopicSpec spec;
    spec.documents = 20;
    spec.vocabulary = 12;
    const auto planted = plant_topic_corpus(spec);
    LdaParams p;
    p.iterations = 5;
    auto m = train_guided_lda(planted.docs, planted.V, {{0}, {3}, {6}, {9}}, 4.0, p);
    assign_topic_types(m, {{0}, {3}, {6}, {9}});
    std::stringstream buf;
    save_topic_model(m, buf);
    const auto back = load_topic_model(buf);
    CHECK(back.K == m.K);
    CHECK(back.V == m.V);
    CHECK(back.phi == m.phi);
    CHECK(back.seeds == m.seeds);
    CHECK(back.topic_types == m.topic_types);
    CHECK(back.seed_boost == m.seed_boost);

    std::stringstream bad("EDAX");
    expect_error(ErrorCode::FormatError, [&] { load_topic_model(bad); });
}
