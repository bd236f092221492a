#include "edascope/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "edascope/binary_io.hpp"
#include "edascope/error.hpp"
#include "edascope/util.hpp"

namespace edascope {

namespace {

constexpr std::uint16_t kVectorFormatVersion = 1;
constexpr std::uint16_t kEncoderFormatVersion = 1;

double sigmoid(double x) {
    return 1.0 / (1.0 + std::exp(-x));
}

std::vector<float> to_float(const std::vector<double>& v) {
    return std::vector<float>(v.begin(), v.end());
}

void check_finite(const std::vector<float>& v, const std::string& id) {
    for (float x : v) {
        if (!std::isfinite(x)) throw Error(ErrorCode::FormatError, "non-finite value in vector " + id);
    }
}

}  // namespace

// ---- vector file ----

void write_vector_file(std::ostream& out, const VectorFile& file) {
    using namespace binary;
    for (const auto& r : file.records) {
        if (r.values.size() != file.dim) {
            throw Error(ErrorCode::DimensionMismatch, "vector " + r.id + " has " + std::to_string(r.values.size()) +
                                                          " values, expected " + std::to_string(file.dim));
        }
    }
    write_magic(out, "EDAV");
    write_le<std::uint16_t>(out, kVectorFormatVersion);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(file.dim));
    write_le<std::uint64_t>(out, file.records.size());
    for (const auto& r : file.records) {
        write_string16(out, r.id);
        for (float x : r.values) write_le<float>(out, x);
    }
}

void write_vector_file(const std::filesystem::path& path, const VectorFile& file) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    write_vector_file(out, file);
}

VectorFile read_vector_file(std::istream& in, std::optional<std::size_t> expected_dim) {
    using namespace binary;
    expect_magic(in, "EDAV");
    if (read_le<std::uint16_t>(in) != kVectorFormatVersion) throw Error(ErrorCode::FormatError, "unsupported vector file version");
    VectorFile file;
    file.dim = read_le<std::uint32_t>(in);
    if (expected_dim && *expected_dim != file.dim) {
        throw Error(ErrorCode::DimensionMismatch, "vector file has D=" + std::to_string(file.dim) + ", expected " +
                                                      std::to_string(*expected_dim));
    }
    const auto count = read_le<std::uint64_t>(in);
    for (std::uint64_t i = 0; i < count; ++i) {
        VectorRecord r;
        r.id = read_string16(in);
        r.values.resize(file.dim);
        for (auto& x : r.values) x = read_le<float>(in);
        check_finite(r.values, r.id);
        file.records.push_back(std::move(r));
    }
    return file;
}

VectorFile read_vector_file(const std::filesystem::path& path, std::optional<std::size_t> expected_dim) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    return read_vector_file(in, expected_dim);
}

// ---- vector math ----

double dot(const std::vector<float>& a, const std::vector<float>& b) {
    if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "dot of vectors with different lengths");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
    const double na = std::sqrt(dot(a, a));
    const double nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

void l2_normalize(std::vector<float>& v) {
    double n = 0.0;
    for (float x : v) n += static_cast<double>(x) * x;
    n = std::sqrt(n);
    if (n == 0.0) return;
    for (auto& x : v) x = static_cast<float>(x / n);
}

std::string_view encoder_kind_name(EncoderKind kind) {
    switch (kind) {
        case EncoderKind::TfidfProjection: return "tfidf-projection";
        case EncoderKind::ParagraphVector: return "paragraph-vector";
        case EncoderKind::Imported: return "imported";
        case EncoderKind::RandomBaseline: return "random-baseline";
    }
    return "unknown";
}

// ---- backends ----

struct Encoder::Backend {
    virtual ~Backend() = default;
    virtual Embedding encode(const BlockTokens& blocks, std::string_view sequence_id, std::size_t dim) const = 0;
    virtual void save(std::ostream& out) const = 0;
};

namespace {

// Per-block vectors mean-pooled over blocks that have usable tokens.
template <typename BlockFn>
Embedding mean_pool(const BlockTokens& blocks, std::size_t dim, BlockFn&& encode_block) {
    std::vector<double> acc(dim, 0.0);
    std::size_t used = 0;
    for (const auto& block : blocks) {
        std::vector<double> v;
        if (!encode_block(block, v)) continue;
        for (std::size_t j = 0; j < dim; ++j) acc[j] += v[j];
        ++used;
    }
    Embedding e;
    if (used == 0) {
        e.values.assign(dim, 0.0F);
        e.empty = true;
        return e;
    }
    for (auto& x : acc) x /= static_cast<double>(used);
    e.values = to_float(acc);
    return e;
}

class TfidfBackend final : public Encoder::Backend {
public:
    TfidfBackend(std::size_t vocabulary, std::size_t dim, std::uint64_t seed, std::vector<double> idf)
        : V_(vocabulary), D_(dim), seed_(seed), idf_(std::move(idf)), sign_(V_ * D_) {
        Rng rng(seed);
        for (std::size_t i = 0; i < sign_.size(); i += 64) {
            const auto bits = rng.next_u64();
            for (std::size_t b = 0; b < 64 && i + b < sign_.size(); ++b) sign_[i + b] = (bits >> b) & 1U;
        }
    }

    Embedding encode(const BlockTokens& blocks, std::string_view, std::size_t dim) const override {
        const double scale = 1.0 / std::sqrt(static_cast<double>(D_));
        return mean_pool(blocks, dim, [&](const std::vector<TokenId>& block, std::vector<double>& v) {
            std::map<TokenId, double> tf;
            for (auto t : block) {
                if (t < V_) tf[t] += 1.0;
            }
            if (tf.empty()) return false;
            v.assign(D_, 0.0);
            for (const auto& [t, count] : tf) {
                const double w = count * idf_[t] * scale;
                const auto* row = &sign_[static_cast<std::size_t>(t) * D_];
                for (std::size_t j = 0; j < D_; ++j) v[j] += row[j] ? w : -w;
            }
            return true;
        });
    }

    void save(std::ostream& out) const override {
        using namespace binary;
        write_le<std::uint32_t>(out, static_cast<std::uint32_t>(V_));
        write_le<std::uint64_t>(out, seed_);
        for (double x : idf_) write_le<double>(out, x);
    }

    static std::shared_ptr<TfidfBackend> load(std::istream& in, std::size_t dim) {
        using namespace binary;
        const std::size_t V = read_le<std::uint32_t>(in);
        const auto seed = read_le<std::uint64_t>(in);
        std::vector<double> idf(V);
        for (auto& x : idf) x = read_le<double>(in);
        return std::make_shared<TfidfBackend>(V, dim, seed, std::move(idf));
    }

private:
    std::size_t V_;
    std::size_t D_;
    std::uint64_t seed_;
    std::vector<double> idf_;
    std::vector<unsigned char> sign_;  // V x D, 1 means +
};

class NoiseTable {
public:
    NoiseTable() = default;
    explicit NoiseTable(const std::vector<std::uint64_t>& counts) {
        double acc = 0.0;
        for (auto c : counts) {
            acc += std::pow(static_cast<double>(c), 0.75);
            cumulative_.push_back(acc);
        }
    }
    TokenId sample(Rng& rng) const {
        const double u = rng.uniform() * cumulative_.back();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        return static_cast<TokenId>(std::min<std::size_t>(it - cumulative_.begin(), cumulative_.size() - 1));
    }

private:
    std::vector<double> cumulative_;
};

// One SGD step of PV-DBOW for (doc, token) plus negatives. Returns the loss.
// When out_vectors is null, word vectors stay frozen.
double dbow_step(std::vector<double>& doc, TokenId token, std::vector<float>* out_vectors,
                 const std::vector<float>& frozen, std::size_t D, std::size_t negatives, const NoiseTable& noise,
                 Rng& rng, double lr, std::vector<double>& neu1e) {
    std::fill(neu1e.begin(), neu1e.end(), 0.0);
    double loss = 0.0;
    const std::vector<float>& W = out_vectors ? *out_vectors : frozen;
    for (std::size_t s = 0; s <= negatives; ++s) {
        TokenId target = token;
        double label = 1.0;
        if (s > 0) {
            target = noise.sample(rng);
            if (target == token) continue;
            label = 0.0;
        }
        const float* w = &W[static_cast<std::size_t>(target) * D];
        double f = 0.0;
        for (std::size_t j = 0; j < D; ++j) f += doc[j] * w[j];
        const double p = sigmoid(f);
        loss -= std::log(std::max(label > 0.5 ? p : 1.0 - p, 1e-12));
        const double g = (label - p) * lr;
        for (std::size_t j = 0; j < D; ++j) neu1e[j] += g * w[j];
        if (out_vectors) {
            float* wm = &(*out_vectors)[static_cast<std::size_t>(target) * D];
            for (std::size_t j = 0; j < D; ++j) wm[j] += static_cast<float>(g * doc[j]);
        }
    }
    for (std::size_t j = 0; j < D; ++j) doc[j] += neu1e[j];
    return loss;
}

class ParagraphVectorBackend final : public Encoder::Backend {
public:
    ParagraphVectorBackend(std::size_t vocabulary, const ParagraphVectorParams& params, std::vector<std::uint64_t> counts,
                           std::vector<float> word_vectors)
        : V_(vocabulary), params_(params), counts_(std::move(counts)), words_(std::move(word_vectors)), noise_(counts_) {}

    Embedding encode(const BlockTokens& blocks, std::string_view, std::size_t dim) const override {
        return mean_pool(blocks, dim, [&](const std::vector<TokenId>& block, std::vector<double>& v) {
            std::vector<TokenId> tokens;
            for (auto t : block) {
                if (t < V_) tokens.push_back(t);
            }
            if (tokens.empty()) return false;
            v = infer(tokens);
            return true;
        });
    }

    std::vector<double> infer(const std::vector<TokenId>& tokens) const {
        const std::size_t D = params_.dim;
        std::uint64_t h = fnv1a_u64(params_.seed);
        for (auto t : tokens) h = fnv1a_u64(t, h);
        Rng rng(h);
        std::vector<double> doc(D), neu1e(D);
        for (auto& x : doc) x = (rng.uniform() - 0.5) / static_cast<double>(D);
        const double total = static_cast<double>(params_.infer_epochs * tokens.size());
        double step = 0.0;
        for (std::size_t e = 0; e < params_.infer_epochs; ++e) {
            for (auto t : tokens) {
                const double lr = std::max(params_.learning_rate * (1.0 - step / total), params_.learning_rate * 1e-4);
                step += 1.0;
                dbow_step(doc, t, nullptr, words_, D, params_.negative_samples, noise_, rng, lr, neu1e);
            }
        }
        return doc;
    }

    void save(std::ostream& out) const override {
        using namespace binary;
        write_le<std::uint32_t>(out, static_cast<std::uint32_t>(V_));
        write_le<std::uint64_t>(out, params_.epochs);
        write_le<std::uint64_t>(out, params_.negative_samples);
        write_le<double>(out, params_.learning_rate);
        write_le<std::uint64_t>(out, params_.infer_epochs);
        write_le<std::uint64_t>(out, params_.seed);
        for (auto c : counts_) write_le<std::uint64_t>(out, c);
        for (float x : words_) write_le<float>(out, x);
    }

    static std::shared_ptr<ParagraphVectorBackend> load(std::istream& in, std::size_t dim) {
        using namespace binary;
        ParagraphVectorParams p;
        p.dim = dim;
        const std::size_t V = read_le<std::uint32_t>(in);
        p.epochs = read_le<std::uint64_t>(in);
        p.negative_samples = read_le<std::uint64_t>(in);
        p.learning_rate = read_le<double>(in);
        p.infer_epochs = read_le<std::uint64_t>(in);
        p.seed = read_le<std::uint64_t>(in);
        std::vector<std::uint64_t> counts(V);
        for (auto& c : counts) c = read_le<std::uint64_t>(in);
        std::vector<float> words(V * dim);
        for (auto& x : words) x = read_le<float>(in);
        return std::make_shared<ParagraphVectorBackend>(V, p, std::move(counts), std::move(words));
    }

private:
    std::size_t V_;
    ParagraphVectorParams params_;
    std::vector<std::uint64_t> counts_;
    std::vector<float> words_;  // output vectors, V x D
    NoiseTable noise_;
};

class ImportedBackend final : public Encoder::Backend {
public:
    explicit ImportedBackend(VectorFile file) : file_(std::move(file)) {
        for (std::size_t i = 0; i < file_.records.size(); ++i) index_[file_.records[i].id] = i;
    }

    Embedding encode(const BlockTokens&, std::string_view sequence_id, std::size_t) const override {
        const auto it = index_.find(std::string(sequence_id));
        if (it == index_.end()) throw Error(ErrorCode::UnknownSequence, "no imported vector for '" + std::string(sequence_id) + "'");
        Embedding e;
        e.values = file_.records[it->second].values;
        e.empty = std::all_of(e.values.begin(), e.values.end(), [](float x) { return x == 0.0F; });
        return e;
    }

    void save(std::ostream& out) const override { write_vector_file(out, file_); }

private:
    VectorFile file_;
    std::map<std::string, std::size_t> index_;
};

class RandomBackend final : public Encoder::Backend {
public:
    explicit RandomBackend(std::uint64_t seed) : seed_(seed) {}

    Embedding encode(const BlockTokens& blocks, std::string_view, std::size_t dim) const override {
        std::uint64_t h = fnv1a_u64(seed_);
        bool any = false;
        for (const auto& b : blocks) {
            for (auto t : b) {
                h = fnv1a_u64(t, h);
                any = true;
            }
            h = fnv1a_u64(0xffffffffffffffffULL, h);
        }
        Embedding e;
        e.values.assign(dim, 0.0F);
        if (!any) {
            e.empty = true;
            return e;
        }
        Rng rng(h);
        for (auto& x : e.values) x = static_cast<float>(rng.gaussian());
        return e;
    }

    void save(std::ostream& out) const override { binary::write_le<std::uint64_t>(out, seed_); }

private:
    std::uint64_t seed_;
};

}  // namespace

// ---- Encoder ----

Encoder::Encoder(std::string id, std::size_t dim, EncoderKind kind, std::shared_ptr<const Backend> backend)
    : id_(std::move(id)), dim_(dim), kind_(kind), backend_(std::move(backend)) {}

Embedding Encoder::encode(const BlockTokens& blocks, std::string_view sequence_id) const {
    if (!backend_) throw Error(ErrorCode::InvalidArgument, "encoder not initialized");
    return backend_->encode(blocks, sequence_id, dim_);
}

void Encoder::save(std::ostream& out) const {
    using namespace binary;
    if (!backend_) throw Error(ErrorCode::InvalidArgument, "encoder not initialized");
    write_magic(out, "EDAE");
    write_le<std::uint16_t>(out, kEncoderFormatVersion);
    write_le<std::uint8_t>(out, static_cast<std::uint8_t>(kind_));
    write_string16(out, id_);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
    backend_->save(out);
}

void Encoder::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    save(out);
}

Encoder Encoder::load(std::istream& in) {
    using namespace binary;
    expect_magic(in, "EDAE");
    if (read_le<std::uint16_t>(in) != kEncoderFormatVersion) throw Error(ErrorCode::FormatError, "unsupported encoder version");
    const auto kind = read_le<std::uint8_t>(in);
    auto id = read_string16(in);
    const std::size_t dim = read_le<std::uint32_t>(in);
    switch (static_cast<EncoderKind>(kind)) {
        case EncoderKind::TfidfProjection:
            return Encoder(std::move(id), dim, EncoderKind::TfidfProjection, TfidfBackend::load(in, dim));
        case EncoderKind::ParagraphVector:
            return Encoder(std::move(id), dim, EncoderKind::ParagraphVector, ParagraphVectorBackend::load(in, dim));
        case EncoderKind::Imported: {
            auto file = read_vector_file(in, dim);
            return Encoder(std::move(id), dim, EncoderKind::Imported, std::make_shared<ImportedBackend>(std::move(file)));
        }
        case EncoderKind::RandomBaseline:
            return Encoder(std::move(id), dim, EncoderKind::RandomBaseline,
                           std::make_shared<RandomBackend>(read_le<std::uint64_t>(in)));
    }
    throw Error(ErrorCode::FormatError, "unknown encoder kind " + std::to_string(kind));
}

Encoder Encoder::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    return load(in);
}

Encoder make_tfidf_encoder(const std::vector<std::vector<TokenId>>& documents, std::size_t vocabulary,
                           std::size_t dim, std::uint64_t seed) {
    if (dim < 1) throw Error(ErrorCode::InvalidHyperparameter, "dimension must be >= 1");
    std::vector<std::size_t> df(vocabulary, 0);
    for (const auto& doc : documents) {
        std::vector<TokenId> uniq(doc.begin(), doc.end());
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        for (auto t : uniq) {
            if (t < vocabulary) ++df[t];
        }
    }
    const double n = static_cast<double>(documents.size());
    std::vector<double> idf(vocabulary);
    for (std::size_t t = 0; t < vocabulary; ++t) idf[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[t]))) + 1.0;
    return Encoder("tfidf-d" + std::to_string(dim) + "-s" + std::to_string(seed), dim, EncoderKind::TfidfProjection,
                   std::make_shared<TfidfBackend>(vocabulary, dim, seed, std::move(idf)));
}

ParagraphVectorTraining train_paragraph_vectors(const std::vector<std::vector<TokenId>>& corpus, std::size_t vocabulary,
                                                const ParagraphVectorParams& params) {
    if (params.dim < 1 || params.epochs < 1 || params.negative_samples < 1 || !(params.learning_rate > 0.0) ||
        params.infer_epochs < 1 || vocabulary < 1) {
        throw Error(ErrorCode::InvalidHyperparameter, "invalid paragraph vector hyperparameters");
    }
    if (corpus.empty()) throw Error(ErrorCode::InvalidHyperparameter, "paragraph vectors need a non-empty corpus");
    const std::size_t D = params.dim;
    std::vector<std::uint64_t> counts(vocabulary, 0);
    std::size_t total_tokens = 0;
    for (const auto& doc : corpus) {
        for (auto t : doc) {
            if (t >= vocabulary) throw Error(ErrorCode::InvalidArgument, "token id out of vocabulary range");
            ++counts[t];
            ++total_tokens;
        }
    }
    if (total_tokens == 0) throw Error(ErrorCode::InvalidHyperparameter, "paragraph vectors need at least one token");
    const NoiseTable noise(counts);

    Rng rng(params.seed);
    std::vector<std::vector<double>> docs(corpus.size(), std::vector<double>(D));
    for (auto& d : docs) {
        for (auto& x : d) x = (rng.uniform() - 0.5) / static_cast<double>(D);
    }
    std::vector<float> words(vocabulary * D, 0.0F);
    std::vector<double> neu1e(D);
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    ParagraphVectorTraining out;
    const double steps = static_cast<double>(params.epochs * total_tokens);
    double step = 0.0;
    for (std::size_t e = 0; e < params.epochs; ++e) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        double loss = 0.0;
        for (auto d : order) {
            for (auto t : corpus[d]) {
                const double lr = std::max(params.learning_rate * (1.0 - step / steps), params.learning_rate * 1e-4);
                step += 1.0;
                loss += dbow_step(docs[d], t, &words, words, D, params.negative_samples, noise, rng, lr, neu1e);
            }
        }
        out.epoch_loss.push_back(loss / static_cast<double>(total_tokens));
    }
    for (const auto& d : docs) out.doc_vectors.push_back(to_float(d));
    out.encoder = Encoder("pv-d" + std::to_string(D) + "-s" + std::to_string(params.seed), D,
                          EncoderKind::ParagraphVector,
                          std::make_shared<ParagraphVectorBackend>(vocabulary, params, std::move(counts), std::move(words)));
    return out;
}

Encoder make_imported_encoder(VectorFile file) {
    std::map<std::string, int> seen;
    for (const auto& r : file.records) {
        if (r.values.size() != file.dim) throw Error(ErrorCode::DimensionMismatch, "vector " + r.id + " has wrong length");
        check_finite(r.values, r.id);
        if (seen[r.id]++) throw Error(ErrorCode::FormatError, "duplicate vector id " + r.id);
    }
    const std::size_t dim = file.dim;
    return Encoder("imported-d" + std::to_string(dim), dim, EncoderKind::Imported,
                   std::make_shared<ImportedBackend>(std::move(file)));
}

Encoder import_vectors(const std::filesystem::path& path, std::optional<std::size_t> expected_dim) {
    return make_imported_encoder(read_vector_file(path, expected_dim));
}

Encoder make_random_encoder(std::size_t dim, std::uint64_t seed) {
    if (dim < 1) throw Error(ErrorCode::InvalidHyperparameter, "dimension must be >= 1");
    return Encoder("random-d" + std::to_string(dim) + "-s" + std::to_string(seed), dim, EncoderKind::RandomBaseline,
                   std::make_shared<RandomBackend>(seed));
}

}  // namespace edascope
