#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edascope/types.hpp"

namespace edascope {

// ---- vector file (EDAV) ----

struct VectorRecord {
    std::string id;
    std::vector<float> values;
};

struct VectorFile {
    std::size_t dim = 0;
    std::vector<VectorRecord> records;
};

// Throws DimensionMismatch when a record's length differs from dim.
void write_vector_file(std::ostream& out, const VectorFile& file);
void write_vector_file(const std::filesystem::path& path, const VectorFile& file);
// Throws FormatError on bad magic, truncation or non-finite values, and
// DimensionMismatch when expected_dim is given and differs.
VectorFile read_vector_file(std::istream& in, std::optional<std::size_t> expected_dim = std::nullopt);
VectorFile read_vector_file(const std::filesystem::path& path, std::optional<std::size_t> expected_dim = std::nullopt);

// ---- encoders ----

enum class EncoderKind : std::uint8_t { TfidfProjection = 0, ParagraphVector = 1, Imported = 2, RandomBaseline = 3 };

std::string_view encoder_kind_name(EncoderKind kind);

// A sequence is encoded from its blocks' token ids.
using BlockTokens = std::vector<std::vector<TokenId>>;

struct Embedding {
    std::vector<float> values;
    bool empty = false;  // no usable tokens; values are all zero
};

class Encoder {
public:
    struct Backend;

    Encoder() = default;
    Encoder(std::string id, std::size_t dim, EncoderKind kind, std::shared_ptr<const Backend> backend);

    const std::string& id() const { return id_; }
    std::size_t dim() const { return dim_; }
    EncoderKind kind() const { return kind_; }
    bool valid() const { return backend_ != nullptr; }

    // Pure function of the tokens and trained state. Native backends encode
    // each block and mean-pool the non-empty ones. The Imported backend
    // looks up sequence_id and throws UnknownSequence when absent.
    Embedding encode(const BlockTokens& blocks, std::string_view sequence_id = {}) const;

    void save(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;
    static Encoder load(std::istream& in);
    static Encoder load(const std::filesystem::path& path);

private:
    std::string id_;
    std::size_t dim_ = 0;
    EncoderKind kind_ = EncoderKind::TfidfProjection;
    std::shared_ptr<const Backend> backend_;
};

// idf(t) = ln((1 + N) / (1 + df(t))) + 1 over the given documents; the
// projection has entries +-1/sqrt(D) drawn from seed.
Encoder make_tfidf_encoder(const std::vector<std::vector<TokenId>>& documents, std::size_t vocabulary,
                           std::size_t dim, std::uint64_t seed);

struct ParagraphVectorParams {
    std::size_t dim = 128;
    std::size_t epochs = 100;
    std::size_t negative_samples = 5;
    double learning_rate = 0.025;
    std::size_t infer_epochs = 50;
    std::uint64_t seed = 7;
};

struct ParagraphVectorTraining {
    Encoder encoder;
    std::vector<double> epoch_loss;                // mean per-token loss per epoch
    std::vector<std::vector<float>> doc_vectors;   // trained vector per corpus document
};

// PV-DBOW with negative sampling from the unigram^0.75 distribution and a
// linearly decaying learning rate. Throws InvalidHyperparameter.
ParagraphVectorTraining train_paragraph_vectors(const std::vector<std::vector<TokenId>>& corpus,
                                                std::size_t vocabulary, const ParagraphVectorParams& params);

// Lookup-table encoder over externally computed vectors.
Encoder import_vectors(const std::filesystem::path& path, std::optional<std::size_t> expected_dim = std::nullopt);
Encoder make_imported_encoder(VectorFile file);

// Baseline: a Gaussian vector seeded by the whole token sequence, unrelated
// to content similarity.
Encoder make_random_encoder(std::size_t dim, std::uint64_t seed);

// ---- vector math ----

double dot(const std::vector<float>& a, const std::vector<float>& b);
double cosine(const std::vector<float>& a, const std::vector<float>& b);
// In-place L2 normalization; zero vectors are left unchanged.
void l2_normalize(std::vector<float>& v);

}  // namespace edascope
