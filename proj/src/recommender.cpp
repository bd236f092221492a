#include "edascope/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "edascope/binary_io.hpp"
#include "edascope/error.hpp"
#include "edascope/pipeline.hpp"
#include "edascope/util.hpp"

namespace edascope {

using namespace binary;

namespace {

constexpr std::uint16_t kRecommenderFormatVersion = 1;

std::vector<TokenId> distinct(std::vector<TokenId> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

double sigmoid(double z) {
    return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// Normalized embedding of a prefix, or an empty vector when it has no tokens.
std::vector<float> embed(const BlockTokens& blocks, const Encoder& encoder) {
    auto emb = encoder.encode(blocks);
    if (emb.empty) return {};
    l2_normalize(emb.values);
    return emb.values;
}

void sort_items(std::vector<std::pair<TokenId, double>>& items, std::size_t limit) {
    std::sort(items.begin(), items.end(),
              [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });
    if (items.size() > limit) items.resize(limit);
}

// Normalized prefix embeddings of an indexed sequence, index m - 1 for the
// first m blocks; empty entries for prefixes without tokens.
using PrefixCache = std::map<std::string, std::vector<std::vector<float>>, std::less<>>;

const std::vector<std::vector<float>>& prefix_embeddings(const IndexEntry& entry, const Encoder& encoder,
                                                         PrefixCache& cache) {
    auto it = cache.find(entry.id);
    if (it != cache.end()) return it->second;
    std::vector<std::vector<float>> out;
    for (std::size_t m = 1; m < entry.block_tokens.size(); ++m) {
        const BlockTokens prefix(entry.block_tokens.begin(), entry.block_tokens.begin() + static_cast<std::ptrdiff_t>(m));
        out.push_back(embed(prefix, encoder));
    }
    return cache.emplace(entry.id, std::move(out)).first->second;
}

Recommendation score_retrieval(const std::vector<float>& q, const RecommenderModel& model, const Encoder& encoder,
                               const SequenceIndex& index, std::size_t limit, std::string_view exclude,
                               PrefixCache& cache) {
    Recommendation rec;
    rec.model_id = model.id;
    auto hits = index.top_k(q, model.neighbors + (exclude.empty() ? 0 : 1));
    std::erase_if(hits, [&](const SearchHit& h) { return h.id == exclude; });
    if (hits.size() > model.neighbors) hits.resize(model.neighbors);

    std::map<TokenId, double> votes;
    double total = 0.0;
    for (const auto& h : hits) {
        const auto* entry = index.find(h.id);
        if (!entry || entry->block_tokens.size() < 2) continue;
        const auto& prefixes = prefix_embeddings(*entry, encoder, cache);
        std::size_t best = 0;
        double best_sim = -2.0;
        for (std::size_t m = 0; m < prefixes.size(); ++m) {
            if (prefixes[m].empty()) continue;
            const double s = dot(prefixes[m], q);
            if (s > best_sim) {
                best_sim = s;
                best = m + 1;
            }
        }
        if (best == 0) continue;
        const double w = std::max(h.score, 0.0);
        total += w;
        for (auto t : distinct(entry->block_tokens[best])) votes[t] += w;
    }
    if (total > 0.0) {
        for (const auto& [t, v] : votes) {
            if (v > 0.0) rec.items.emplace_back(t, std::min(1.0, v / total));
        }
    }
    sort_items(rec.items, limit);
    return rec;
}

Recommendation score_linear(const std::vector<float>& q, const RecommenderModel& model, std::size_t limit) {
    if (q.size() != model.dim) throw Error(ErrorCode::DimensionMismatch, "encoder dimension differs from the model");
    Recommendation rec;
    rec.model_id = model.id;
    for (std::size_t v = 0; v < model.vocabulary; ++v) {
        double z = model.bias[v];
        const float* w = &model.weights[v * model.dim];
        for (std::size_t j = 0; j < model.dim; ++j) z += static_cast<double>(w[j]) * q[j];
        rec.items.emplace_back(static_cast<TokenId>(v), sigmoid(z));
    }
    sort_items(rec.items, limit);
    return rec;
}

Recommendation score(const std::vector<float>& q, const RecommenderModel& model, const Encoder& encoder,
                     const SequenceIndex& index, std::size_t limit, std::string_view exclude, PrefixCache& cache) {
    if (limit < 1) throw Error(ErrorCode::InvalidArgument, "limit must be at least 1");
    if (model.kind == RecommenderKind::LinearHead) return score_linear(q, model, limit);
    if (encoder.dim() != index.dim()) throw Error(ErrorCode::DimensionMismatch, "encoder and index dimensions differ");
    return score_retrieval(q, model, encoder, index, limit, exclude, cache);
}

}  // namespace

std::vector<TrainingPair> make_training_pairs(const std::vector<SequenceAnalysis>& analyses, TargetMode mode) {
    std::vector<TrainingPair> out;
    for (const auto& a : analyses) {
        const auto& blocks = a.block_tokens;
        for (std::size_t n = 1; n < blocks.size(); ++n) {
            TrainingPair p;
            p.sequence_id = a.sequence_id;
            p.prefix.assign(blocks.begin(), blocks.begin() + static_cast<std::ptrdiff_t>(n));
            if (mode == TargetMode::NextBlock) {
                p.target = distinct(blocks[n]);
            } else {
                for (std::size_t j = n; j < blocks.size(); ++j) p.target.insert(p.target.end(), blocks[j].begin(), blocks[j].end());
                p.target = distinct(std::move(p.target));
            }
            if (!p.target.empty()) out.push_back(std::move(p));
        }
    }
    return out;
}

std::string_view recommender_kind_name(RecommenderKind kind) {
    return kind == RecommenderKind::LinearHead ? "linear_head" : "retrieval_based";
}

RecommenderModel train_linear_head(const std::vector<TrainingPair>& pairs, const Encoder& encoder,
                                   std::size_t vocabulary, const LinearHeadParams& params) {
    if (!(params.learning_rate > 0.0) || !std::isfinite(params.learning_rate) || vocabulary < 1) {
        throw Error(ErrorCode::InvalidHyperparameter, "learning rate and vocabulary size must be positive");
    }
    if (pairs.empty()) throw Error(ErrorCode::InvalidArgument, "no training pairs");
    const std::size_t D = encoder.dim();

    std::vector<std::vector<float>> inputs;
    std::vector<std::vector<TokenId>> targets;
    for (const auto& p : pairs) {
        for (auto t : p.target) {
            if (t >= vocabulary) throw Error(ErrorCode::InvalidArgument, "target token outside the vocabulary");
        }
        auto e = embed(p.prefix, encoder);
        if (e.empty()) continue;
        inputs.push_back(std::move(e));
        targets.push_back(p.target);
    }
    if (inputs.empty()) throw Error(ErrorCode::InvalidArgument, "no training pair has a non-empty prefix");

    RecommenderModel m;
    m.kind = RecommenderKind::LinearHead;
    m.id = "linear-" + encoder.id() + "-e" + std::to_string(params.epochs) + "-s" + std::to_string(params.seed);
    m.dim = D;
    m.vocabulary = vocabulary;
    m.params = params;
    m.weights.assign(vocabulary * D, 0.0F);
    m.bias.assign(vocabulary, 0.0F);

    Rng rng(params.seed);
    std::vector<std::size_t> order(inputs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<char> y(vocabulary, 0);
    const double lr = params.learning_rate;
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        double loss = 0.0;
        for (auto idx : order) {
            const auto& x = inputs[idx];
            for (auto t : targets[idx]) y[t] = 1;
            for (std::size_t v = 0; v < vocabulary; ++v) {
                float* w = &m.weights[v * D];
                double z = m.bias[v];
                for (std::size_t j = 0; j < D; ++j) z += static_cast<double>(w[j]) * x[j];
                const double p = sigmoid(z);
                const double clipped = std::clamp(p, 1e-12, 1.0 - 1e-12);
                loss -= y[v] ? std::log(clipped) : std::log(1.0 - clipped);
                const double g = lr * (p - (y[v] ? 1.0 : 0.0));
                for (std::size_t j = 0; j < D; ++j) w[j] -= static_cast<float>(g * x[j]);
                m.bias[v] -= static_cast<float>(g);
            }
            for (auto t : targets[idx]) y[t] = 0;
        }
        m.epoch_loss.push_back(loss / static_cast<double>(order.size() * vocabulary));
    }
    return m;
}

RecommenderModel make_retrieval_recommender(std::size_t neighbors) {
    if (neighbors < 1) throw Error(ErrorCode::InvalidHyperparameter, "neighbors must be at least 1");
    RecommenderModel m;
    m.kind = RecommenderKind::RetrievalBased;
    m.neighbors = neighbors;
    m.id = "retrieval-n" + std::to_string(neighbors);
    return m;
}

Recommendation recommend_for_prefix(const BlockTokens& prefix, const RecommenderModel& model, const Encoder& encoder,
                                    const SequenceIndex& index, std::size_t limit, std::string_view exclude) {
    const auto q = embed(prefix, encoder);
    if (q.empty()) throw Error(ErrorCode::EmptyQuery, "no known API calls in the query");
    PrefixCache cache;
    return score(q, model, encoder, index, limit, exclude, cache);
}

Recommendation recommend(std::string_view query_code, const RecommenderModel& model, const Encoder& encoder,
                         const SequenceIndex& index, const Vocabulary& vocabulary, std::size_t limit,
                         const ExtractOptions& options) {
    const auto q = analyze_query(query_code, vocabulary, options);
    return recommend_for_prefix(q.block_tokens, model, encoder, index, limit);
}

std::pair<double, double> set_scores(const std::vector<TokenId>& predicted, const std::vector<TokenId>& truth) {
    const auto p = distinct(predicted);
    const auto t = distinct(truth);
    if (p.empty() && t.empty()) return {1.0, 1.0};
    std::vector<TokenId> inter;
    std::set_intersection(p.begin(), p.end(), t.begin(), t.end(), std::back_inserter(inter));
    const double i = static_cast<double>(inter.size());
    const double u = static_cast<double>(p.size() + t.size()) - i;
    const double acc = t.empty() ? 0.0 : i / static_cast<double>(t.size());
    return {acc, i / u};
}

RecommenderScores eval_recommender(const std::vector<TrainingPair>& pairs, const RecommenderModel& model,
                                   const Encoder& encoder, const SequenceIndex& index, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw Error(ErrorCode::InvalidArgument, "threshold must lie in (0, 1)");
    RecommenderScores out;
    PrefixCache cache;
    const std::size_t limit = std::max<std::size_t>(1, model.kind == RecommenderKind::LinearHead ? model.vocabulary : 1 << 20);
    for (const auto& p : pairs) {
        std::vector<TokenId> predicted;
        const auto q = embed(p.prefix, encoder);
        if (!q.empty()) {
            const auto rec = score(q, model, encoder, index, limit, p.sequence_id, cache);
            for (const auto& [t, prob] : rec.items) {
                if (prob > threshold) predicted.push_back(t);
            }
        }
        const auto [acc, iou] = set_scores(predicted, p.target);
        out.pair_accuracy.push_back(acc);
        out.pair_iou.push_back(iou);
        out.accuracy += acc;
        out.iou += iou;
    }
    out.pairs = pairs.size();
    if (out.pairs > 0) {
        out.accuracy /= static_cast<double>(out.pairs);
        out.iou /= static_cast<double>(out.pairs);
    }
    return out;
}

double random_predictor_iou(const std::vector<TrainingPair>& pairs, std::size_t vocabulary, std::size_t trials,
                            std::uint64_t seed) {
    if (pairs.empty() || trials == 0) return 0.0;
    Rng rng(seed);
    std::vector<TokenId> pool(vocabulary);
    std::iota(pool.begin(), pool.end(), TokenId{0});
    double total = 0.0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        for (const auto& p : pairs) {
            const std::size_t n = std::min(p.target.size(), vocabulary);
            for (std::size_t i = 0; i < n; ++i) std::swap(pool[i], pool[i + rng.below(vocabulary - i)]);
            total += set_scores(std::vector<TokenId>(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n)), p.target).second;
        }
    }
    return total / static_cast<double>(trials * pairs.size());
}

// ---- serialization ----

void RecommenderModel::save(std::ostream& out) const {
    write_magic(out, "EDAR");
    write_le<std::uint16_t>(out, kRecommenderFormatVersion);
    write_le<std::uint8_t>(out, static_cast<std::uint8_t>(kind));
    write_le<double>(out, threshold);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(vocabulary));
    write_string16(out, id);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(neighbors));
    write_le<std::uint64_t>(out, params.epochs);
    write_le<double>(out, params.learning_rate);
    write_le<std::uint64_t>(out, params.seed);
    if (kind == RecommenderKind::LinearHead) {
        for (float w : weights) write_le<float>(out, w);
        for (float b : bias) write_le<float>(out, b);
    }
}

void RecommenderModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    save(out);
}

RecommenderModel RecommenderModel::load(std::istream& in) {
    expect_magic(in, "EDAR");
    if (read_le<std::uint16_t>(in) != kRecommenderFormatVersion) throw Error(ErrorCode::FormatError, "unsupported recommender version");
    RecommenderModel m;
    const auto kind = read_le<std::uint8_t>(in);
    if (kind > 1) throw Error(ErrorCode::FormatError, "unknown recommender kind");
    m.kind = static_cast<RecommenderKind>(kind);
    m.threshold = read_le<double>(in);
    m.dim = read_le<std::uint32_t>(in);
    m.vocabulary = read_le<std::uint32_t>(in);
    m.id = read_string16(in);
    m.neighbors = read_le<std::uint32_t>(in);
    m.params.epochs = read_le<std::uint64_t>(in);
    m.params.learning_rate = read_le<double>(in);
    m.params.seed = read_le<std::uint64_t>(in);
    if (m.kind == RecommenderKind::LinearHead) {
        m.weights.resize(m.vocabulary * m.dim);
        for (auto& w : m.weights) w = read_le<float>(in);
        m.bias.resize(m.vocabulary);
        for (auto& b : m.bias) b = read_le<float>(in);
    }
    return m;
}

RecommenderModel RecommenderModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    return load(in);
}

// ---- documentation links ----

const DocUrlTemplates& default_doc_url_templates() {
    static const DocUrlTemplates t = {
        {"pandas", "https://pandas.pydata.org/docs/reference/api/{name}.html"},
        {"numpy", "https://numpy.org/doc/stable/reference/generated/{name}.html"},
        {"scipy", "https://docs.scipy.org/doc/scipy/reference/generated/{name}.html"},
        {"sklearn", "https://scikit-learn.org/stable/modules/generated/{name}.html"},
        {"matplotlib", "https://matplotlib.org/stable/api/_as_gen/{name}.html"},
        {"seaborn", "https://seaborn.pydata.org/generated/{name}.html"},
        {"keras", "https://keras.io/search.html?query={member}"},
        {"__builtins__", "https://docs.python.org/3/library/functions.html#{member}"},
    };
    return t;
}

std::string documentation_url(std::string_view canonical, const DocUrlTemplates& templates) {
    const auto dot_pos = canonical.find('.');
    const std::string root(canonical.substr(0, dot_pos));
    const auto it = templates.find(root);
    if (it == templates.end()) return {};
    const auto last = canonical.rfind('.');
    const std::string member(last == std::string_view::npos ? canonical : canonical.substr(last + 1));
    std::string url = it->second;
    for (const auto& [key, value] : {std::pair<std::string, std::string>{"{name}", std::string(canonical)}, {"{member}", member}}) {
        for (auto pos = url.find(key); pos != std::string::npos; pos = url.find(key, pos + value.size())) url.replace(pos, key.size(), value);
    }
    return url;
}

}  // namespace edascope
