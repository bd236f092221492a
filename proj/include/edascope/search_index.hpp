#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edascope/analyzer.hpp"
#include "edascope/embedding.hpp"
#include "edascope/pipeline.hpp"

namespace edascope {

struct TypeRun {
    EdaType type = EdaType::Unknown;
    std::size_t length = 0;
    bool operator==(const TypeRun&) const = default;
};

std::vector<TypeRun> run_length_types(const std::vector<EdaType>& types);

struct IndexEntry {
    std::string id;
    std::vector<float> vector;  // unit norm
    std::string notebook_id;
    std::size_t block_count = 0;
    std::vector<TypeRun> type_runs;
    std::vector<std::pair<std::string, double>> keywords;
    BlockTokens block_tokens;  // kept for prefix alignment in recommendations
};

struct SearchHit {
    std::string id;
    double score = 0.0;
};

struct SearchResult {
    std::string query;
    std::vector<SearchHit> hits;  // non-increasing score, ties by ascending id
};

class SequenceIndex {
public:
    SequenceIndex() = default;
    SequenceIndex(std::string encoder_id, std::size_t dim, std::vector<IndexEntry> entries);

    const std::string& encoder_id() const { return encoder_id_; }
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return entries_.size(); }
    const std::vector<IndexEntry>& entries() const { return entries_; }
    const IndexEntry* find(std::string_view id) const;

    // Exact cosine scan. The query is normalized here; a zero query scores
    // 0 against everything.
    std::vector<SearchHit> top_k(std::vector<float> query, std::size_t k) const;

    // 1-based rank of `id` under the same ordering as top_k.
    std::size_t rank_of(const std::vector<float>& normalized_query, std::string_view id) const;

    // Writes <path> (EDAV vectors) and <path>.meta.jsonl.
    void save(const std::filesystem::path& path) const;
    static SequenceIndex load(const std::filesystem::path& path, std::optional<std::size_t> expected_dim = std::nullopt);

private:
    std::string encoder_id_;
    std::size_t dim_ = 0;
    std::vector<IndexEntry> entries_;
};

std::filesystem::path index_metadata_path(const std::filesystem::path& index_path);

struct IndexBuild {
    SequenceIndex index;
    std::vector<std::string> skipped;  // sequences with no API tokens
};

// Entries are ordered by id. Sequences without any token cannot be
// normalized and are reported in `skipped`. Throws DimensionMismatch.
IndexBuild build_index(const std::vector<SequenceAnalysis>& analyses, const Encoder& encoder);

SearchResult search(std::string_view query_code, std::size_t k, const SequenceIndex& index, const Encoder& encoder,
                    const Vocabulary& vocabulary, const ExtractOptions& options = {});

struct HitCurve {
    std::size_t queries = 0;
    std::size_t skipped = 0;        // prefixes without tokens
    std::vector<std::size_t> hits;  // hits[k - 1] = queries whose truth ranks <= k

    std::size_t at(std::size_t k) const { return hits.at(k - 1); }
};

// Every prefix of 1..N-1 blocks of each test sequence is a query for that
// sequence. Sequences shorter than 2 blocks or missing from the index are
// ignored.
HitCurve eval_search(const std::vector<SequenceAnalysis>& test_sequences, const SequenceIndex& index,
                     const Encoder& encoder, std::size_t k_max);

}  // namespace edascope
