// Command-line front end: one subcommand per pipeline stage plus query,
// evaluation and serving commands. Artifacts live in the work directory.

#include <csignal>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "edascope/error.hpp"
#include "edascope/service.hpp"
#include "edascope/synthetic.hpp"
#include "edascope/workspace.hpp"
#include "httplib.h"

using namespace edascope;
using nlohmann::json;

namespace {

struct Options {
    std::string work = "edascope-work";
    std::string corpus;
    std::string index;
    std::string encoder;
    std::string model;
    std::uint64_t seed = 7;
    std::size_t dim = 128;
    std::size_t topics = 4;
    double threshold = 0.5;
    int port = 8765;
    std::string host = "127.0.0.1";

    // stage-specific
    std::string receivers = "untracked";
    std::size_t keywords = 10;
    std::size_t iterations = 1000;
    double boost = 10.0;
    bool unguided = false;
    std::string encoder_kind = "pv";
    std::size_t epochs = 0;
    std::string vectors;
    double holdout = 0.0;
    std::string recommender_kind = "linear";
    double learning_rate = 0.5;
    std::size_t neighbors = 10;
    std::string target = "next";
    std::string code;
    std::string query_file;
    std::size_t k = 10;
    std::size_t limit = 10;
    std::size_t k_max = 20;
    std::string out;
    std::size_t notebooks = 40;
};

std::optional<std::filesystem::path> opt_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

std::string read_query(const Options& o) {
    if (!o.code.empty()) return o.code;
    if (o.query_file.empty() || o.query_file == "-") {
        return {std::istreambuf_iterator<char>(std::cin), {}};
    }
    std::ifstream in(o.query_file, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + o.query_file);
    return {std::istreambuf_iterator<char>(in), {}};
}

TargetMode target_mode(const std::string& s) {
    if (s == "next") return TargetMode::NextBlock;
    if (s == "remaining") return TargetMode::AllRemaining;
    throw Error(ErrorCode::InvalidArgument, "target must be next or remaining");
}

EncoderKind encoder_kind(const std::string& s) {
    if (s == "pv") return EncoderKind::ParagraphVector;
    if (s == "tfidf") return EncoderKind::TfidfProjection;
    if (s == "random") return EncoderKind::RandomBaseline;
    if (s == "import") return EncoderKind::Imported;
    throw Error(ErrorCode::InvalidArgument, "encoder kind must be pv, tfidf, random or import");
}

SnapshotPaths snapshot_paths(const Options& o) {
    return {opt_path(o.index), opt_path(o.encoder), opt_path(o.model)};
}

httplib::Server* g_server = nullptr;

void stop_server(int) {
    if (g_server) g_server->stop();
}

// ---- subcommands ----

void cmd_ingest(const Options& o) {
    if (o.corpus.empty()) throw Error(ErrorCode::InvalidArgument, "--corpus is required");
    const auto r = run_ingest(Workspace(o.work), o.corpus);
    json skipped = json::array();
    for (const auto& s : r.skipped) skipped.push_back({{"path", s.path}, {"reason", s.reason}});
    print({{"notebooks", r.stats.notebook_count},
           {"code_cells", r.stats.code_cell_count},
           {"markdown_cells", r.stats.markdown_cell_count},
           {"median_code_cells_per_notebook", r.stats.median_code_cells_per_notebook},
           {"skipped", skipped}});
}

void cmd_slice(const Options& o) { print({{"sequences", run_slice(Workspace(o.work))}}); }

void cmd_analyze(const Options& o) {
    AnalyzeOptions a;
    if (o.receivers == "one-step") {
        a.extract.receivers = ReceiverPolicy::OneStep;
    } else if (o.receivers != "untracked") {
        throw Error(ErrorCode::InvalidArgument, "--receivers must be untracked or one-step");
    }
    a.keywords = o.keywords;
    const auto r = run_analyze(Workspace(o.work), a);
    print({{"sequences", r.sequences}, {"vocabulary", r.vocabulary}, {"parse_failures", r.parse_failures}});
}

void cmd_train_topics(const Options& o) {
    TopicTrainingOptions t;
    t.lda.topics = o.topics;
    t.lda.iterations = o.iterations;
    t.lda.seed = o.seed;
    t.seed_boost = o.boost;
    t.guided = !o.unguided;
    const Workspace ws(o.work);
    const auto m = run_train_topics(ws, t);
    const auto vocab = Vocabulary::load(ws.vocabulary());
    json topics = json::array();
    for (std::size_t k = 0; k < m.K; ++k) {
        json top = json::array();
        for (auto id : m.top_tokens(k, 10)) top.push_back(vocab.canonical(id));
        topics.push_back({{"topic", k}, {"eda_type", eda_type_name(m.topic_types.at(k))}, {"top_tokens", top}});
    }
    print({{"topics", topics}});
}

void cmd_train_encoder(const Options& o) {
    EncoderOptions e;
    e.kind = encoder_kind(o.encoder_kind);
    e.dim = o.dim;
    e.seed = o.seed;
    if (o.epochs > 0) e.epochs = o.epochs;
    e.vectors = o.vectors;
    e.holdout = o.holdout;
    if (e.kind == EncoderKind::Imported && o.vectors.empty()) throw Error(ErrorCode::InvalidArgument, "--vectors is required");
    const auto enc = run_train_encoder(Workspace(o.work), e);
    print({{"encoder_id", enc.id()}, {"kind", encoder_kind_name(enc.kind())}, {"dim", enc.dim()}});
}

void cmd_build_index(const Options& o) {
    const auto built = run_build_index(Workspace(o.work), {opt_path(o.encoder), opt_path(o.index)});
    print({{"entries", built.index.size()}, {"encoder_id", built.index.encoder_id()}, {"skipped", built.skipped}});
}

void cmd_train_recommender(const Options& o) {
    RecommenderOptions r;
    if (o.recommender_kind == "linear") {
        r.kind = RecommenderKind::LinearHead;
    } else if (o.recommender_kind == "retrieval") {
        r.kind = RecommenderKind::RetrievalBased;
    } else {
        throw Error(ErrorCode::InvalidArgument, "--kind must be linear or retrieval");
    }
    r.linear.epochs = o.epochs > 0 ? o.epochs : LinearHeadParams{}.epochs;
    r.linear.learning_rate = o.learning_rate;
    r.linear.seed = o.seed;
    r.neighbors = o.neighbors;
    r.threshold = o.threshold;
    r.target = target_mode(o.target);
    const auto m = run_train_recommender(Workspace(o.work), r, opt_path(o.model));
    json out = {{"model_id", m.id}, {"kind", recommender_kind_name(m.kind)}, {"threshold", m.threshold}};
    if (!m.epoch_loss.empty()) out["epoch_loss"] = m.epoch_loss;
    print(out);
}

void cmd_search(const Options& o) {
    const Service svc(load_snapshot(Workspace(o.work), snapshot_paths(o)));
    const auto r = svc.search(json{{"code", read_query(o)}, {"k", o.k}}.dump());
    if (r.status != 200) throw Error(static_cast<ErrorCode>(r.body["error"]["code"].get<int>()), r.body["error"]["message"].get<std::string>());
    print(r.body);
}

void cmd_recommend(const Options& o) {
    const Service svc(load_snapshot(Workspace(o.work), snapshot_paths(o)));
    const auto r = svc.recommend(json{{"code", read_query(o)}, {"limit", o.limit}}.dump());
    if (r.status != 200) throw Error(static_cast<ErrorCode>(r.body["error"]["code"].get<int>()), r.body["error"]["message"].get<std::string>());
    print(r.body);
}

void cmd_eval_search(const Options& o) {
    const auto curve = run_eval_search(Workspace(o.work), o.k_max);
    std::cout << "# queries " << curve.queries << " skipped " << curve.skipped << '\n';
    std::cout << "k\thits\n";
    for (std::size_t k = 1; k <= o.k_max; ++k) std::cout << k << '\t' << curve.at(k) << '\n';
}

void cmd_eval_recommend(const Options& o) {
    const auto e = run_eval_recommender(Workspace(o.work), o.threshold, target_mode(o.target), opt_path(o.model));
    print({{"pairs", e.scores.pairs},
           {"threshold", o.threshold},
           {"accuracy", e.scores.accuracy},
           {"iou", e.scores.iou},
           {"random_iou", e.random_iou}});
}

void cmd_gen_synthetic(const Options& o) {
    if (o.out.empty()) throw Error(ErrorCode::InvalidArgument, "--out is required");
    SyntheticSpec spec;
    spec.notebooks = o.notebooks;
    spec.seed = o.seed;
    write_synthetic_corpus(o.out, spec);
    print({{"notebooks", spec.notebooks}, {"out", o.out}, {"seed", spec.seed}});
}

void cmd_serve(const Options& o) {
    Service svc(load_snapshot(Workspace(o.work), snapshot_paths(o)));
    httplib::Server server;
    svc.mount(server);
    g_server = &server;
    std::signal(SIGINT, stop_server);
    std::signal(SIGTERM, stop_server);
    std::cerr << "listening on http://" << o.host << ':' << o.port << '\n';
    if (!server.listen(o.host, o.port)) throw Error(ErrorCode::IoError, "cannot listen on " + o.host + ":" + std::to_string(o.port));
}

void cmd_pipeline(const Options& o) {
    cmd_ingest(o);
    cmd_slice(o);
    cmd_analyze(o);
    cmd_train_topics(o);
    cmd_train_encoder(o);
    cmd_build_index(o);
    cmd_train_recommender(o);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mine EDA sequences from notebooks; search and recommend over them."};
    app.require_subcommand(1);
    Options o;

    app.add_option("--work", o.work, "work directory")->envname("EDASCOPE_WORK");
    const auto add = [&](CLI::App* c, std::initializer_list<const char*> flags) {
        for (std::string f : flags) {
            if (f == "corpus") c->add_option("--corpus", o.corpus, "notebook directory")->envname("EDASCOPE_CORPUS");
            if (f == "index") c->add_option("--index", o.index, "index file (default <work>/index.edav)")->envname("EDASCOPE_INDEX");
            if (f == "encoder") c->add_option("--encoder", o.encoder, "encoder file (default <work>/encoder.bin)")->envname("EDASCOPE_ENCODER");
            if (f == "model") c->add_option("--model", o.model, "recommender file (default <work>/recommender.bin)")->envname("EDASCOPE_MODEL");
            if (f == "seed") c->add_option("--seed", o.seed, "random seed")->envname("EDASCOPE_SEED");
            if (f == "dim") c->add_option("--dim", o.dim, "embedding dimension")->envname("EDASCOPE_DIM");
            if (f == "topics") c->add_option("--topics", o.topics, "number of topics")->envname("EDASCOPE_TOPICS");
            if (f == "threshold") c->add_option("--threshold", o.threshold, "probability threshold")->envname("EDASCOPE_THRESHOLD");
            if (f == "port") c->add_option("--port", o.port, "HTTP port")->envname("EDASCOPE_PORT");
            if (f == "query") {
                c->add_option("--code", o.code, "query code; cells separated by '# %%' lines");
                c->add_option("--query-file", o.query_file, "read the query from a file ('-' for stdin)");
            }
        }
    };

    auto* ingest = app.add_subcommand("ingest", "parse every notebook under --corpus");
    add(ingest, {"corpus"});
    auto* slice = app.add_subcommand("slice", "cut notebooks into EDA sequences");
    auto* analyze = app.add_subcommand("analyze", "extract API tokens and keywords");
    analyze->add_option("--receivers", o.receivers, "untracked | one-step");
    analyze->add_option("--keywords", o.keywords, "keywords per sequence");
    auto* topics = app.add_subcommand("train-topics", "train block topics and label EDA types");
    add(topics, {"seed", "topics"});
    topics->add_option("--iterations", o.iterations, "Gibbs sweeps");
    topics->add_option("--boost", o.boost, "seed-word boost");
    topics->add_flag("--unguided", o.unguided, "plain LDA");
    auto* encoder = app.add_subcommand("train-encoder", "train or import the sequence encoder");
    add(encoder, {"seed", "dim"});
    encoder->add_option("--kind", o.encoder_kind, "pv | tfidf | random | import");
    encoder->add_option("--epochs", o.epochs, "training epochs (pv)");
    encoder->add_option("--vectors", o.vectors, "EDAV file with precomputed vectors (import)");
    encoder->add_option("--holdout", o.holdout, "fraction of notebooks kept for evaluation");
    auto* index = app.add_subcommand("build-index", "encode and index every sequence");
    add(index, {"encoder", "index"});
    auto* recommender = app.add_subcommand("train-recommender", "train the API recommender");
    add(recommender, {"seed", "threshold", "model"});
    recommender->add_option("--kind", o.recommender_kind, "linear | retrieval");
    recommender->add_option("--epochs", o.epochs, "SGD epochs (linear)");
    recommender->add_option("--learning-rate", o.learning_rate, "SGD step (linear)");
    recommender->add_option("--neighbors", o.neighbors, "neighbors (retrieval)");
    recommender->add_option("--target", o.target, "next | remaining");
    auto* search = app.add_subcommand("search", "find sequences similar to the query code");
    add(search, {"index", "encoder", "model", "query"});
    search->add_option("-k", o.k, "results");
    auto* recommend = app.add_subcommand("recommend", "suggest APIs to use next");
    add(recommend, {"index", "encoder", "model", "query"});
    recommend->add_option("--limit", o.limit, "suggestions");
    auto* eval_search = app.add_subcommand("eval-search", "prefix-query rank evaluation (k, hits)");
    eval_search->add_option("--k-max", o.k_max, "largest k");
    auto* eval_recommend = app.add_subcommand("eval-recommend", "accuracy and IOU of the recommender");
    add(eval_recommend, {"threshold", "model"});
    eval_recommend->add_option("--target", o.target, "next | remaining");
    auto* gen = app.add_subcommand("gen-synthetic", "write a seeded synthetic notebook corpus");
    add(gen, {"seed"});
    gen->add_option("--out", o.out, "output directory");
    gen->add_option("--notebooks", o.notebooks, "notebook count");
    auto* serve = app.add_subcommand("serve", "HTTP API over the built index");
    add(serve, {"index", "encoder", "model", "port"});
    serve->add_option("--host", o.host, "bind address");
    auto* pipeline = app.add_subcommand("pipeline", "run every stage from ingest to train-recommender");
    add(pipeline, {"corpus", "seed", "dim", "topics", "threshold"});
    pipeline->add_option("--kind", o.encoder_kind, "encoder: pv | tfidf | random");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) cmd_ingest(o);
        if (*slice) cmd_slice(o);
        if (*analyze) cmd_analyze(o);
        if (*topics) cmd_train_topics(o);
        if (*encoder) cmd_train_encoder(o);
        if (*index) cmd_build_index(o);
        if (*recommender) cmd_train_recommender(o);
        if (*search) cmd_search(o);
        if (*recommend) cmd_recommend(o);
        if (*eval_search) cmd_eval_search(o);
        if (*eval_recommend) cmd_eval_recommend(o);
        if (*gen) cmd_gen_synthetic(o);
        if (*serve) cmd_serve(o);
        if (*pipeline) cmd_pipeline(o);
    } catch (const Error& e) {
        std::cerr << error_body(e.code(), e.what()).dump() << '\n';
        return static_cast<int>(e.code());
    } catch (const std::exception& e) {
        std::cerr << json{{"schema", kSchema}, {"error", {{"code", 1}, {"name", "Internal"}, {"message", e.what()}}}}.dump() << '\n';
        return 1;
    }
    return 0;
}
