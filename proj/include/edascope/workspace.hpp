#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "edascope/analyzer.hpp"
#include "edascope/embedding.hpp"
#include "edascope/notebook.hpp"
#include "edascope/pipeline.hpp"
#include "edascope/recommender.hpp"
#include "edascope/search_index.hpp"
#include "edascope/slicer.hpp"
#include "edascope/topic_model.hpp"

namespace edascope {

// A work directory holding every pipeline artifact:
//   corpus.jsonl      notebooks, corpus stats, skipped files
//   sequences.jsonl   sliced sequences
//   analysis.jsonl    per-sequence tokens, block types, keywords
//   settings.json     extraction settings shared with query analysis
//   vocab.txt         API vocabulary
//   topics.bin        topic model (EDAT)
//   encoder.bin       sequence encoder (EDAE)
//   split.json        held-out notebooks, when requested
//   index.edav        sequence index (+ index.edav.meta.jsonl)
//   recommender.bin   API recommender (EDAR)
struct Workspace {
    std::filesystem::path root;

    explicit Workspace(std::filesystem::path dir) : root(std::move(dir)) {}

    std::filesystem::path corpus() const { return root / "corpus.jsonl"; }
    std::filesystem::path sequences() const { return root / "sequences.jsonl"; }
    std::filesystem::path analysis() const { return root / "analysis.jsonl"; }
    std::filesystem::path settings() const { return root / "settings.json"; }
    std::filesystem::path vocabulary() const { return root / "vocab.txt"; }
    std::filesystem::path topics() const { return root / "topics.bin"; }
    std::filesystem::path encoder() const { return root / "encoder.bin"; }
    std::filesystem::path split() const { return root / "split.json"; }
    std::filesystem::path index() const { return root / "index.edav"; }
    std::filesystem::path recommender() const { return root / "recommender.bin"; }
};

struct IngestReport {
    CorpusStats stats;
    std::vector<SkippedFile> skipped;
};

IngestReport run_ingest(const Workspace& ws, const std::filesystem::path& corpus_root);

// Returns the number of sequences written.
std::size_t run_slice(const Workspace& ws, const SliceOptions& options = {});

struct AnalyzeReport {
    std::size_t sequences = 0;
    std::size_t vocabulary = 0;
    std::size_t parse_failures = 0;
};

AnalyzeReport run_analyze(const Workspace& ws, const AnalyzeOptions& options = {});

ExtractOptions load_extract_settings(const Workspace& ws);

// Trains block topics, stores the model and rewrites analysis.jsonl with
// block types.
TopicModel run_train_topics(const Workspace& ws, const TopicTrainingOptions& options = {});

struct EncoderOptions {
    EncoderKind kind = EncoderKind::ParagraphVector;
    std::size_t dim = 128;
    std::uint64_t seed = 7;
    std::size_t epochs = ParagraphVectorParams{}.epochs;
    std::filesystem::path vectors;  // Imported
    // Fraction of notebooks kept out of encoder training and used by
    // run_eval_search; 0 trains on everything.
    double holdout = 0.0;
};

Encoder run_train_encoder(const Workspace& ws, const EncoderOptions& options = {});

// Deterministic notebook-level split.
bool is_heldout(const std::string& notebook_id, double fraction, std::uint64_t seed);

struct IndexPaths {
    std::optional<std::filesystem::path> encoder;
    std::optional<std::filesystem::path> index;
};

IndexBuild run_build_index(const Workspace& ws, const IndexPaths& paths = {});

struct RecommenderOptions {
    RecommenderKind kind = RecommenderKind::LinearHead;
    LinearHeadParams linear;
    std::size_t neighbors = 10;
    double threshold = 0.5;
    TargetMode target = TargetMode::NextBlock;
};

RecommenderModel run_train_recommender(const Workspace& ws, const RecommenderOptions& options = {},
                                       const std::optional<std::filesystem::path>& model_path = std::nullopt);

// Queries come from held-out sequences when split.json exists.
HitCurve run_eval_search(const Workspace& ws, std::size_t k_max);

struct RecommenderEvaluation {
    RecommenderScores scores;
    double random_iou = 0.0;
};

RecommenderEvaluation run_eval_recommender(const Workspace& ws, double threshold, TargetMode target = TargetMode::NextBlock,
                                           const std::optional<std::filesystem::path>& model_path = std::nullopt);

// Everything a query needs, loaded once and never mutated.
struct Snapshot {
    std::map<std::string, Notebook> notebooks;
    std::map<std::string, EDASequence> sequences;
    std::map<std::string, SequenceAnalysis> analyses;
    Vocabulary vocabulary;
    ExtractOptions extract;
    Encoder encoder;
    SequenceIndex index;
    std::optional<RecommenderModel> recommender;
};

struct SnapshotPaths {
    std::optional<std::filesystem::path> index;
    std::optional<std::filesystem::path> encoder;
    std::optional<std::filesystem::path> model;
};

// The recommender is optional; everything else must exist.
std::shared_ptr<const Snapshot> load_snapshot(const Workspace& ws, const SnapshotPaths& paths = {});

}  // namespace edascope
