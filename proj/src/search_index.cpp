#include "edascope/search_index.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "edascope/error.hpp"
#include "edascope/records.hpp"

namespace edascope {

using nlohmann::json;

std::vector<TypeRun> run_length_types(const std::vector<EdaType>& types) {
    std::vector<TypeRun> out;
    for (auto t : types) {
        if (out.empty() || out.back().type != t) out.push_back({t, 0});
        ++out.back().length;
    }
    return out;
}

SequenceIndex::SequenceIndex(std::string encoder_id, std::size_t dim, std::vector<IndexEntry> entries)
    : encoder_id_(std::move(encoder_id)), dim_(dim), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].vector.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "entry " + entries_[i].id + " has wrong dimension");
        if (i > 0 && entries_[i].id == entries_[i - 1].id) throw Error(ErrorCode::FormatError, "duplicate index id " + entries_[i].id);
    }
}

const IndexEntry* SequenceIndex::find(std::string_view id) const {
    const auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                                     [](const IndexEntry& e, std::string_view v) { return e.id < v; });
    return it != entries_.end() && it->id == id ? &*it : nullptr;
}

std::vector<SearchHit> SequenceIndex::top_k(std::vector<float> query, std::size_t k) const {
    if (query.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "query dimension differs from index");
    l2_normalize(query);
    std::vector<SearchHit> all;
    all.reserve(entries_.size());
    for (const auto& e : entries_) all.push_back({e.id, dot(query, e.vector)});
    const auto better = [](const SearchHit& a, const SearchHit& b) { return a.score != b.score ? a.score > b.score : a.id < b.id; };
    k = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), better);
    all.resize(k);
    for (auto& h : all) h.score = std::clamp(h.score, -1.0, 1.0);
    return all;
}

std::size_t SequenceIndex::rank_of(const std::vector<float>& q, std::string_view id) const {
    const auto* target = find(id);
    if (!target) throw Error(ErrorCode::NotFound, "unknown sequence " + std::string(id));
    const double s = dot(q, target->vector);
    std::size_t rank = 1;
    for (const auto& e : entries_) {
        const double t = dot(q, e.vector);
        if (t > s || (t == s && e.id < target->id)) ++rank;
    }
    return rank;
}

std::filesystem::path index_metadata_path(const std::filesystem::path& index_path) {
    auto p = index_path;
    p += ".meta.jsonl";
    return p;
}

void SequenceIndex::save(const std::filesystem::path& path) const {
    VectorFile vf;
    vf.dim = dim_;
    std::vector<json> meta;
    meta.push_back({{"type", "index"}, {"encoder_id", encoder_id_}, {"dim", dim_}, {"entries", entries_.size()}});
    for (const auto& e : entries_) {
        vf.records.push_back({e.id, e.vector});
        json runs = json::array();
        for (const auto& r : e.type_runs) runs.push_back({eda_type_name(r.type), r.length});
        json keywords = json::array();
        for (const auto& [t, s] : e.keywords) keywords.push_back({t, s});
        meta.push_back({{"type", "entry"},
                        {"id", e.id},
                        {"notebook_id", e.notebook_id},
                        {"block_count", e.block_count},
                        {"type_runs", runs},
                        {"keywords", keywords},
                        {"block_tokens", e.block_tokens}});
    }
    write_vector_file(path, vf);
    records::write_jsonl(index_metadata_path(path), meta);
}

SequenceIndex SequenceIndex::load(const std::filesystem::path& path, std::optional<std::size_t> expected_dim) {
    auto vf = read_vector_file(path, expected_dim);
    std::string encoder_id;
    std::vector<IndexEntry> entries;
    bool header = false;
    try {
        records::read_jsonl(index_metadata_path(path), [&](const json& j) {
            const auto type = j.at("type").get<std::string>();
            if (type == "index") {
                encoder_id = j.at("encoder_id").get<std::string>();
                if (j.at("dim").get<std::size_t>() != vf.dim) throw Error(ErrorCode::DimensionMismatch, "index metadata dimension differs");
                header = true;
                return;
            }
            if (type != "entry") return;
            IndexEntry e;
            e.id = j.at("id").get<std::string>();
            e.notebook_id = j.at("notebook_id").get<std::string>();
            e.block_count = j.at("block_count").get<std::size_t>();
            for (const auto& r : j.at("type_runs")) {
                const auto t = eda_type_from_name(r.at(0).get<std::string>());
                if (!t) throw Error(ErrorCode::FormatError, "unknown eda type in index metadata");
                e.type_runs.push_back({*t, r.at(1).get<std::size_t>()});
            }
            for (const auto& kw : j.at("keywords")) e.keywords.emplace_back(kw.at(0).get<std::string>(), kw.at(1).get<double>());
            e.block_tokens = j.at("block_tokens").get<BlockTokens>();
            entries.push_back(std::move(e));
        });
    } catch (const json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("bad index metadata: ") + e.what());
    }
    if (!header) throw Error(ErrorCode::FormatError, "index metadata lacks a header");
    if (entries.size() != vf.records.size()) throw Error(ErrorCode::FormatError, "index metadata and vectors differ in length");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].id != vf.records[i].id) throw Error(ErrorCode::FormatError, "index metadata out of step at " + entries[i].id);
        entries[i].vector = std::move(vf.records[i].values);
    }
    return SequenceIndex(encoder_id, vf.dim, std::move(entries));
}

IndexBuild build_index(const std::vector<SequenceAnalysis>& analyses, const Encoder& encoder) {
    if (!encoder.valid()) throw Error(ErrorCode::InvalidArgument, "encoder is not initialised");
    IndexBuild out;
    std::vector<IndexEntry> entries;
    for (const auto& a : analyses) {
        auto emb = encoder.encode(a.block_tokens, a.sequence_id);
        if (emb.values.size() != encoder.dim()) throw Error(ErrorCode::DimensionMismatch, "encoder produced a wrong-sized vector");
        if (emb.empty) {
            out.skipped.push_back(a.sequence_id);
            continue;
        }
        l2_normalize(emb.values);
        if (dot(emb.values, emb.values) == 0.0) {
            out.skipped.push_back(a.sequence_id);
            continue;
        }
        IndexEntry e;
        e.id = a.sequence_id;
        e.vector = std::move(emb.values);
        e.notebook_id = a.notebook_id;
        e.block_count = a.block_tokens.size();
        e.type_runs = run_length_types(a.block_types);
        e.keywords = a.keywords;
        e.block_tokens = a.block_tokens;
        entries.push_back(std::move(e));
    }
    out.index = SequenceIndex(encoder.id(), encoder.dim(), std::move(entries));
    return out;
}

SearchResult search(std::string_view query_code, std::size_t k, const SequenceIndex& index, const Encoder& encoder,
                    const Vocabulary& vocabulary, const ExtractOptions& options) {
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
    if (encoder.dim() != index.dim()) throw Error(ErrorCode::DimensionMismatch, "encoder and index dimensions differ");
    const auto q = analyze_query(query_code, vocabulary, options);
    const auto emb = encoder.encode(q.block_tokens);
    if (emb.empty) throw Error(ErrorCode::EmptyQuery, "no known API calls in the query");
    return {std::string(query_code), index.top_k(emb.values, k)};
}

HitCurve eval_search(const std::vector<SequenceAnalysis>& test_sequences, const SequenceIndex& index,
                     const Encoder& encoder, std::size_t k_max) {
    HitCurve curve;
    curve.hits.assign(k_max, 0);
    if (encoder.dim() != index.dim()) throw Error(ErrorCode::DimensionMismatch, "encoder and index dimensions differ");
    for (const auto& a : test_sequences) {
        const auto n = a.block_tokens.size();
        if (n < 2 || !index.find(a.sequence_id)) continue;
        for (std::size_t len = 1; len < n; ++len) {
            const BlockTokens prefix(a.block_tokens.begin(), a.block_tokens.begin() + static_cast<std::ptrdiff_t>(len));
            auto emb = encoder.encode(prefix);
            if (emb.empty) {
                ++curve.skipped;
                continue;
            }
            l2_normalize(emb.values);
            ++curve.queries;
            const auto rank = index.rank_of(emb.values, a.sequence_id);
            for (std::size_t k = rank; k <= k_max; ++k) ++curve.hits[k - 1];
        }
    }
    return curve;
}

}  // namespace edascope
