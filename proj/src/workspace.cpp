#include "edascope/workspace.hpp"

#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>

#include "edascope/error.hpp"
#include "edascope/records.hpp"
#include "edascope/util.hpp"

namespace edascope {

using nlohmann::json;

namespace {

void ensure_root(const Workspace& ws) {
    std::error_code ec;
    std::filesystem::create_directories(ws.root, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create work directory " + ws.root.string());
}

void require(const std::filesystem::path& p, const char* step) {
    if (!std::filesystem::exists(p)) throw Error(ErrorCode::IoError, p.string() + " is missing; run " + step + " first");
}

json read_json(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::FormatError, p.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& p, const json& j) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    out << j.dump(2) << '\n';
}

std::vector<json> analysis_lines(const std::vector<SequenceAnalysis>& analyses) {
    std::vector<json> lines;
    lines.reserve(analyses.size());
    for (const auto& a : analyses) lines.push_back(records::analysis_to_json(a));
    return lines;
}

std::vector<std::vector<TokenId>> flattened(const std::vector<SequenceAnalysis>& analyses) {
    std::vector<std::vector<TokenId>> docs;
    docs.reserve(analyses.size());
    for (const auto& a : analyses) docs.push_back(a.api_order());
    return docs;
}

struct Split {
    double fraction = 0.0;
    std::uint64_t seed = 0;
};

std::optional<Split> read_split(const Workspace& ws) {
    if (!std::filesystem::exists(ws.split())) return std::nullopt;
    const auto j = read_json(ws.split());
    return Split{j.at("holdout").get<double>(), j.at("seed").get<std::uint64_t>()};
}

std::vector<SequenceAnalysis> split_side(const Workspace& ws, bool heldout) {
    auto analyses = records::read_analyses(ws.analysis());
    if (const auto split = read_split(ws)) {
        std::erase_if(analyses, [&](const SequenceAnalysis& a) { return is_heldout(a.notebook_id, split->fraction, split->seed) != heldout; });
    }
    return analyses;
}

std::vector<SequenceAnalysis> training_set(const Workspace& ws) { return split_side(ws, false); }
std::vector<SequenceAnalysis> evaluation_set(const Workspace& ws) { return split_side(ws, true); }

}  // namespace

IngestReport run_ingest(const Workspace& ws, const std::filesystem::path& corpus_root) {
    ensure_root(ws);
    const auto corpus = scan_corpus(corpus_root);
    std::vector<json> lines;
    for (const auto& nb : corpus.notebooks) lines.push_back(records::notebook_to_json(nb));
    lines.push_back(records::stats_to_json(corpus.stats));
    for (const auto& s : corpus.skipped) lines.push_back({{"type", "skipped"}, {"path", s.path}, {"reason", s.reason}});
    records::write_jsonl(ws.corpus(), lines);
    return {corpus.stats, corpus.skipped};
}

std::size_t run_slice(const Workspace& ws, const SliceOptions& options) {
    require(ws.corpus(), "ingest");
    std::vector<json> lines;
    for (const auto& nb : records::read_notebooks(ws.corpus())) {
        for (const auto& seq : slice_notebook(nb, options)) lines.push_back(records::sequence_to_json(seq));
    }
    records::write_jsonl(ws.sequences(), lines);
    return lines.size();
}

AnalyzeReport run_analyze(const Workspace& ws, const AnalyzeOptions& options) {
    require(ws.sequences(), "slice");
    const auto seqs = records::read_sequences(ws.sequences());
    const auto corpus = analyze_corpus(seqs, options);
    records::write_jsonl(ws.analysis(), analysis_lines(corpus.sequences));
    corpus.vocabulary.save(ws.vocabulary());
    write_json(ws.settings(), {{"receivers", options.extract.receivers == ReceiverPolicy::OneStep ? "one-step" : "untracked"},
                               {"allowlist", options.extract.allowlist},
                               {"keywords", options.keywords}});
    AnalyzeReport r;
    r.sequences = corpus.sequences.size();
    r.vocabulary = corpus.vocabulary.size();
    for (const auto& a : corpus.sequences) r.parse_failures += a.parse_failures;
    return r;
}

ExtractOptions load_extract_settings(const Workspace& ws) {
    require(ws.settings(), "analyze");
    const auto j = read_json(ws.settings());
    ExtractOptions o;
    const auto receivers = j.value("receivers", "untracked");
    if (receivers != "untracked" && receivers != "one-step") throw Error(ErrorCode::FormatError, "unknown receiver policy " + receivers);
    o.receivers = receivers == "one-step" ? ReceiverPolicy::OneStep : ReceiverPolicy::Untracked;
    o.allowlist = j.at("allowlist").get<std::vector<std::string>>();
    return o;
}

TopicModel run_train_topics(const Workspace& ws, const TopicTrainingOptions& options) {
    require(ws.analysis(), "analyze");
    const auto seqs = records::read_sequences(ws.sequences());
    auto analyses = records::read_analyses(ws.analysis());
    const auto vocab = Vocabulary::load(ws.vocabulary());
    const auto model = train_block_topics(seqs, analyses, vocab, options);
    label_blocks(analyses, model);
    save_topic_model(model, ws.topics());
    records::write_jsonl(ws.analysis(), analysis_lines(analyses));
    return model;
}

bool is_heldout(const std::string& notebook_id, double fraction, std::uint64_t seed) {
    if (fraction <= 0.0) return false;
    const auto h = fnv1a(notebook_id, fnv1a_u64(seed));
    return static_cast<double>(h >> 11) * 0x1.0p-53 < fraction;
}

Encoder run_train_encoder(const Workspace& ws, const EncoderOptions& options) {
    require(ws.analysis(), "analyze");
    if (options.holdout < 0.0 || options.holdout >= 1.0) throw Error(ErrorCode::InvalidHyperparameter, "holdout must lie in [0, 1)");
    const auto analyses = records::read_analyses(ws.analysis());
    const auto vocab = Vocabulary::load(ws.vocabulary());
    std::vector<SequenceAnalysis> train;
    for (const auto& a : analyses) {
        if (!is_heldout(a.notebook_id, options.holdout, options.seed)) train.push_back(a);
    }
    const auto docs = flattened(train);

    Encoder enc;
    switch (options.kind) {
        case EncoderKind::TfidfProjection:
            enc = make_tfidf_encoder(docs, vocab.size(), options.dim, options.seed);
            break;
        case EncoderKind::ParagraphVector: {
            ParagraphVectorParams p;
            p.dim = options.dim;
            p.epochs = options.epochs;
            p.seed = options.seed;
            enc = train_paragraph_vectors(docs, vocab.size(), p).encoder;
            break;
        }
        case EncoderKind::Imported:
            enc = import_vectors(options.vectors);
            break;
        case EncoderKind::RandomBaseline:
            enc = make_random_encoder(options.dim, options.seed);
            break;
    }
    enc.save(ws.encoder());
    if (options.holdout > 0.0) {
        write_json(ws.split(), {{"holdout", options.holdout}, {"seed", options.seed}});
    } else {
        std::filesystem::remove(ws.split());
    }
    return enc;
}

IndexBuild run_build_index(const Workspace& ws, const IndexPaths& paths) {
    require(ws.analysis(), "analyze");
    const auto encoder = Encoder::load(paths.encoder.value_or(ws.encoder()));
    auto built = build_index(records::read_analyses(ws.analysis()), encoder);
    built.index.save(paths.index.value_or(ws.index()));
    return built;
}

RecommenderModel run_train_recommender(const Workspace& ws, const RecommenderOptions& options,
                                       const std::optional<std::filesystem::path>& model_path) {
    require(ws.analysis(), "analyze");
    if (!(options.threshold > 0.0 && options.threshold < 1.0)) throw Error(ErrorCode::InvalidHyperparameter, "threshold must lie in (0, 1)");
    RecommenderModel model;
    if (options.kind == RecommenderKind::LinearHead) {
        const auto encoder = Encoder::load(ws.encoder());
        const auto vocab = Vocabulary::load(ws.vocabulary());
        model = train_linear_head(make_training_pairs(training_set(ws), options.target), encoder,
                                  vocab.size(), options.linear);
    } else {
        model = make_retrieval_recommender(options.neighbors);
    }
    model.threshold = options.threshold;
    model.save(model_path.value_or(ws.recommender()));
    return model;
}

HitCurve run_eval_search(const Workspace& ws, std::size_t k_max) {
    require(ws.index(), "build-index");
    const auto encoder = Encoder::load(ws.encoder());
    const auto index = SequenceIndex::load(ws.index(), encoder.dim());
    return eval_search(evaluation_set(ws), index, encoder, k_max);
}

RecommenderEvaluation run_eval_recommender(const Workspace& ws, double threshold, TargetMode target,
                                           const std::optional<std::filesystem::path>& model_path) {
    require(ws.index(), "build-index");
    const auto encoder = Encoder::load(ws.encoder());
    const auto index = SequenceIndex::load(ws.index(), encoder.dim());
    const auto model = RecommenderModel::load(model_path.value_or(ws.recommender()));
    const auto vocab = Vocabulary::load(ws.vocabulary());
    const auto pairs = make_training_pairs(evaluation_set(ws), target);
    RecommenderEvaluation out;
    out.scores = eval_recommender(pairs, model, encoder, index, threshold);
    out.random_iou = random_predictor_iou(pairs, vocab.size(), 20, 7);
    return out;
}

std::shared_ptr<const Snapshot> load_snapshot(const Workspace& ws, const SnapshotPaths& paths) {
    auto snap = std::make_shared<Snapshot>();
    require(ws.corpus(), "ingest");
    require(ws.sequences(), "slice");
    require(ws.analysis(), "analyze");
    for (auto& nb : records::read_notebooks(ws.corpus())) {
        auto id = nb.id;
        snap->notebooks.emplace(std::move(id), std::move(nb));
    }
    for (auto& s : records::read_sequences(ws.sequences())) {
        auto id = s.id;
        snap->sequences.emplace(std::move(id), std::move(s));
    }
    for (auto& a : records::read_analyses(ws.analysis())) {
        auto id = a.sequence_id;
        snap->analyses.emplace(std::move(id), std::move(a));
    }
    snap->vocabulary = Vocabulary::load(ws.vocabulary());
    snap->extract = load_extract_settings(ws);
    snap->encoder = Encoder::load(paths.encoder.value_or(ws.encoder()));
    const auto index_path = paths.index.value_or(ws.index());
    require(index_path, "build-index");
    snap->index = SequenceIndex::load(index_path, snap->encoder.dim());
    if (snap->index.encoder_id() != snap->encoder.id()) {
        throw Error(ErrorCode::InvalidArgument, "index was built with encoder " + snap->index.encoder_id() + ", not " + snap->encoder.id());
    }
    const auto model_path = paths.model.value_or(ws.recommender());
    if (paths.model || std::filesystem::exists(model_path)) snap->recommender = RecommenderModel::load(model_path);
    return snap;
}

}  // namespace edascope
