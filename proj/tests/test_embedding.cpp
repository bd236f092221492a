#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "edascope/embedding.hpp"
#include "edascope/error.hpp"
#include "edascope/util.hpp"

using namespace edascope;

namespace {

template <typename F>
void expect_error(ErrorCode code, F&& f) {
    try {
        f();
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == code);
    }
}

std::vector<std::vector<TokenId>> random_corpus(std::size_t docs, std::size_t V, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<TokenId>> out(docs);
    for (auto& d : out) {
        const auto len = 5 + rng.below(10);
        for (std::uint64_t i = 0; i < len; ++i) d.push_back(static_cast<TokenId>(rng.below(V)));
    }
    return out;
}

}  // namespace

TEST_CASE("cosine identities") {
    const std::vector<float> v = {0.3F, -1.0F, 2.0F};
    std::vector<float> neg = v;
    for (auto& x : neg) x = -x;
    const std::vector<float> w = {1.0F, 0.5F, 0.0F};
    CHECK(cosine(v, v) == doctest::Approx(1.0));
    CHECK(cosine(v, neg) == doctest::Approx(-1.0));
    CHECK(cosine(v, w) == cosine(w, v));
    auto n = v;
    l2_normalize(n);
    CHECK(dot(n, n) == doctest::Approx(1.0));
}

TEST_CASE("tf-idf projection: determinism, empty input, overlap ordering") {
    const auto corpus = random_corpus(30, 40, 2);
    const auto enc = make_tfidf_encoder(corpus, 40, 128, 7);
    const BlockTokens seq = {{1, 2, 3}, {4, 5}};
    CHECK(enc.encode(seq).values == enc.encode(seq).values);
    CHECK(enc.encode(seq).values == make_tfidf_encoder(corpus, 40, 128, 7).encode(seq).values);

    const auto empty = enc.encode({});
    CHECK(empty.empty);
    CHECK(std::all_of(empty.values.begin(), empty.values.end(), [](float x) { return x == 0.0F; }));
    CHECK(enc.encode({{}, {}}).empty);

    // 9 of 10 shared tokens vs fully disjoint.
    const BlockTokens a = {{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}};
    const BlockTokens b = {{0, 1, 2, 3, 4, 5, 6, 7, 8, 19}};
    const BlockTokens c = {{20, 21, 22, 23, 24, 25, 26, 27, 28, 29}};
    const double near = cosine(enc.encode(a).values, enc.encode(b).values);
    const double far = cosine(enc.encode(a).values, enc.encode(c).values);
    CHECK(near > far);
    CHECK(near > 0.7);
}

TEST_CASE("tf-idf projection is scale-stable under duplication") {
    const auto corpus = random_corpus(30, 40, 2);
    const auto enc = make_tfidf_encoder(corpus, 40, 64, 1);
    const BlockTokens seq = {{1, 2, 2, 7}, {9, 3}};
    BlockTokens tripled = seq;
    for (auto& b : tripled) {
        const auto orig = b;
        for (int k = 0; k < 2; ++k) b.insert(b.end(), orig.begin(), orig.end());
    }
    CHECK(cosine(enc.encode(seq).values, enc.encode(tripled).values) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mean pooling over blocks") {
    const auto corpus = random_corpus(10, 20, 3);
    const auto enc = make_tfidf_encoder(corpus, 20, 32, 1);
    const auto a = enc.encode({{1, 2}}).values;
    const auto b = enc.encode({{5}}).values;
    const auto pooled = enc.encode({{1, 2}, {}, {5}}).values;
    for (std::size_t j = 0; j < 32; ++j) CHECK(pooled[j] == doctest::Approx((a[j] + b[j]) / 2.0));
}

TEST_CASE("paragraph vectors: duplicates end up close, loss falls") {
    auto corpus = random_corpus(100, 60, 4);
    corpus[1] = corpus[0];
    ParagraphVectorParams p;
    p.dim = 32;
    p.epochs = 20;
    p.seed = 3;
    const auto trained = train_paragraph_vectors(corpus, 60, p);
    REQUIRE(trained.epoch_loss.size() == 20);
    CHECK(trained.epoch_loss.back() < trained.epoch_loss.front());

    const auto& dv = trained.doc_vectors;
    const double dup = cosine(dv[0], dv[1]);
    Rng rng(8);
    double mean = 0.0;
    const int pairs = 500;
    for (int i = 0; i < pairs; ++i) {
        const auto x = rng.below(dv.size());
        auto y = rng.below(dv.size());
        while (y == x) y = rng.below(dv.size());
        mean += cosine(dv[x], dv[y]);
    }
    mean /= pairs;
    CHECK(dup > mean);

    // Encoding infers with frozen word vectors and is deterministic.
    const BlockTokens seq = {corpus[0]};
    CHECK(trained.encoder.encode(seq).values == trained.encoder.encode(seq).values);
    const auto again = train_paragraph_vectors(corpus, 60, p);
    CHECK(again.doc_vectors == trained.doc_vectors);
    CHECK(again.encoder.encode(seq).values == trained.encoder.encode(seq).values);
}

TEST_CASE("paragraph vector hyperparameters are validated") {
    ParagraphVectorParams p;
    p.epochs = 0;
    expect_error(ErrorCode::InvalidHyperparameter, [&] { train_paragraph_vectors({{0}}, 1, p); });
    expect_error(ErrorCode::InvalidHyperparameter, [&] { train_paragraph_vectors({}, 1, ParagraphVectorParams{}); });
}

TEST_CASE("vector file round trip and validation") {
    VectorFile f;
    f.dim = 8;
    Rng rng(2);
    for (const char* id : {"a", "bb", "ccc"}) {
        VectorRecord r{id, std::vector<float>(8)};
        for (auto& x : r.values) x = static_cast<float>(rng.gaussian());
        f.records.push_back(r);
    }
    std::stringstream buf;
    write_vector_file(buf, f);
    const std::string bytes = buf.str();
    // magic + version + D + count, then per record u16 len + id + 8 floats.
    CHECK(bytes.size() == 4 + 2 + 4 + 8 + (2 + 1 + 32) + (2 + 2 + 32) + (2 + 3 + 32));
    CHECK(bytes.substr(0, 4) == "EDAV");

    std::stringstream in(bytes);
    const auto back = read_vector_file(in);
    REQUIRE(back.records.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.records[i].id == f.records[i].id);
        CHECK(std::memcmp(back.records[i].values.data(), f.records[i].values.data(), 32) == 0);
    }

    const auto path = std::filesystem::temp_directory_path() / "edascope_vectors.edav";
    write_vector_file(path, f);
    const auto enc = import_vectors(path);
    CHECK(enc.dim() == 8);
    CHECK(enc.kind() == EncoderKind::Imported);
    for (const auto& r : f.records) CHECK(enc.encode({}, r.id).values == r.values);
    expect_error(ErrorCode::UnknownSequence, [&] { enc.encode({}, "zzz"); });
    expect_error(ErrorCode::DimensionMismatch, [&] { import_vectors(path, 16); });

    f.records[1].values[3] = std::numeric_limits<float>::quiet_NaN();
    write_vector_file(path, f);
    expect_error(ErrorCode::FormatError, [&] { import_vectors(path); });

    f.records[1].values.resize(4);
    expect_error(ErrorCode::DimensionMismatch, [&] { write_vector_file(path, f); });
    std::filesystem::remove(path);

    std::stringstream truncated(bytes.substr(0, 30));
    expect_error(ErrorCode::FormatError, [&] { read_vector_file(truncated); });
}

TEST_CASE("encoder files round trip for every backend") {
    const auto corpus = random_corpus(20, 30, 5);
    ParagraphVectorParams p;
    p.dim = 16;
    p.epochs = 3;
    VectorFile vf;
    vf.dim = 16;
    vf.records.push_back({"s1", std::vector<float>(16, 0.5F)});
    const std::vector<Encoder> encoders = {make_tfidf_encoder(corpus, 30, 16, 4),
                                           train_paragraph_vectors(corpus, 30, p).encoder,
                                           make_imported_encoder(vf), make_random_encoder(16, 9)};
    const BlockTokens seq = {{1, 2, 3}, {4}};
    for (const auto& enc : encoders) {
        std::stringstream buf;
        enc.save(buf);
        const auto back = Encoder::load(buf);
        CHECK(back.id() == enc.id());
        CHECK(back.dim() == enc.dim());
        CHECK(back.kind() == enc.kind());
        CHECK(back.encode(seq, "s1").values == enc.encode(seq, "s1").values);
        std::stringstream again;
        back.save(again);
        std::stringstream first;
        enc.save(first);
        CHECK(again.str() == first.str());
    }
}

TEST_CASE("random baseline ignores content similarity") {
    const auto enc = make_random_encoder(32, 1);
    const auto a = enc.encode({{1, 2, 3}});
    CHECK(a.values == enc.encode({{1, 2, 3}}).values);
    CHECK(a.values != enc.encode({{1, 2}, {3}}).values);
    CHECK(enc.encode({}).empty);
}
