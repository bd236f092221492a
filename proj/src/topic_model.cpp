#include "edascope/topic_model.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include "edascope/binary_io.hpp"
#include "edascope/error.hpp"
#include "edascope/util.hpp"

namespace edascope {

namespace {

constexpr std::uint16_t kTopicFormatVersion = 1;

std::size_t sample(Rng& rng, const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double u = rng.uniform() * total;
    double acc = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        acc += weights[k];
        if (u < acc) return k;
    }
    return weights.size() - 1;
}

// seed_topic[w] is the seeded topic of w or -1.
TopicModel gibbs(const std::vector<std::vector<TokenId>>& input, std::size_t V, const std::vector<int>& seed_topic,
                 double boost, const LdaParams& params) {
    const std::size_t K = params.topics;
    const double alpha = params.alpha > 0.0 ? params.alpha : 50.0 / static_cast<double>(std::max<std::size_t>(K, 1));
    if (K < 1) throw Error(ErrorCode::InvalidHyperparameter, "topic count must be >= 1");
    if (V < 1) throw Error(ErrorCode::InvalidHyperparameter, "vocabulary must be non-empty");
    if (!(params.beta > 0.0)) throw Error(ErrorCode::InvalidHyperparameter, "beta must be > 0");
    if (params.iterations < 1) throw Error(ErrorCode::InvalidHyperparameter, "iterations must be >= 1");
    if (!(boost >= 1.0)) throw Error(ErrorCode::InvalidHyperparameter, "seed boost must be >= 1");

    std::vector<const std::vector<TokenId>*> docs;
    for (const auto& d : input) {
        for (auto w : d) {
            if (w >= V) throw Error(ErrorCode::InvalidArgument, "token id out of vocabulary range");
        }
        if (!d.empty()) docs.push_back(&d);
    }

    const double beta = params.beta;
    const double vbeta = static_cast<double>(V) * beta;
    std::vector<std::uint32_t> n_kw(K * V, 0), n_k(K, 0), n_dk(docs.size() * K, 0);
    std::vector<std::vector<std::uint32_t>> z(docs.size());
    Rng rng(params.seed);
    std::vector<double> weights(K);

    for (std::size_t d = 0; d < docs.size(); ++d) {
        z[d].resize(docs[d]->size());
        for (std::size_t i = 0; i < docs[d]->size(); ++i) {
            const TokenId w = (*docs[d])[i];
            for (std::size_t k = 0; k < K; ++k) {
                weights[k] = seed_topic[w] == static_cast<int>(k) ? boost : 1.0;
            }
            const auto k = sample(rng, weights);
            z[d][i] = static_cast<std::uint32_t>(k);
            ++n_kw[k * V + w];
            ++n_k[k];
            ++n_dk[d * K + k];
        }
    }

    for (std::size_t it = 0; it < params.iterations; ++it) {
        for (std::size_t d = 0; d < docs.size(); ++d) {
            for (std::size_t i = 0; i < docs[d]->size(); ++i) {
                const TokenId w = (*docs[d])[i];
                const std::size_t old = z[d][i];
                --n_kw[old * V + w];
                --n_k[old];
                --n_dk[d * K + old];
                for (std::size_t k = 0; k < K; ++k) {
                    double p = (n_dk[d * K + k] + alpha) * (n_kw[k * V + w] + beta) / (n_k[k] + vbeta);
                    if (seed_topic[w] == static_cast<int>(k)) p *= boost;
                    weights[k] = p;
                }
                const auto k = sample(rng, weights);
                z[d][i] = static_cast<std::uint32_t>(k);
                ++n_kw[k * V + w];
                ++n_k[k];
                ++n_dk[d * K + k];
            }
        }
    }

    TopicModel model;
    model.K = K;
    model.V = V;
    model.alpha = alpha;
    model.beta = beta;
    model.iterations = params.iterations;
    model.seed_boost = boost;
    model.rng_seed = params.seed;
    model.topic_types.assign(K, EdaType::Unknown);
    model.phi.resize(K * V);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t w = 0; w < V; ++w) {
            model.phi[k * V + w] = (n_kw[k * V + w] + beta) / (n_k[k] + vbeta);
        }
    }
    return model;
}

}  // namespace

std::vector<TokenId> TopicModel::top_tokens(std::size_t topic, std::size_t n) const {
    std::vector<TokenId> ids(V);
    std::iota(ids.begin(), ids.end(), TokenId{0});
    n = std::min(n, ids.size());
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(), [&](TokenId a, TokenId b) {
        const double pa = p(topic, a), pb = p(topic, b);
        return pa != pb ? pa > pb : a < b;
    });
    ids.resize(n);
    return ids;
}

TopicModel train_lda(const std::vector<std::vector<TokenId>>& docs, std::size_t V, const LdaParams& params) {
    return gibbs(docs, V, std::vector<int>(V, -1), 1.0, params);
}

TopicModel train_guided_lda(const std::vector<std::vector<TokenId>>& docs, std::size_t V,
                            const std::vector<std::vector<TokenId>>& seeds, double seed_boost,
                            const LdaParams& params) {
    if (seeds.size() > params.topics) throw Error(ErrorCode::InvalidHyperparameter, "more seed lists than topics");
    std::vector<int> seed_topic(V, -1);
    for (std::size_t k = 0; k < seeds.size(); ++k) {
        for (auto w : seeds[k]) {
            if (w >= V) throw Error(ErrorCode::InvalidArgument, "seed token out of vocabulary range");
            if (seed_topic[w] != -1 && seed_topic[w] != static_cast<int>(k)) {
                throw Error(ErrorCode::SeedConflict, "token " + std::to_string(w) + " seeded to two topics");
            }
            seed_topic[w] = static_cast<int>(k);
        }
    }
    TopicModel model = gibbs(docs, V, seed_topic, seed_boost, params);
    model.seeds.assign(model.K, {});
    for (std::size_t k = 0; k < seeds.size(); ++k) {
        const std::set<TokenId> uniq(seeds[k].begin(), seeds[k].end());
        model.seeds[k].assign(uniq.begin(), uniq.end());
    }
    return model;
}

std::vector<double> infer_mixture(const std::vector<TokenId>& doc, const TopicModel& model) {
    const std::size_t K = model.K;
    std::vector<double> theta(K, 1.0 / static_cast<double>(K));
    std::vector<TokenId> tokens;
    for (auto w : doc) {
        if (w < model.V) tokens.push_back(w);
    }
    if (tokens.empty()) return theta;
    std::vector<double> next(K), resp(K);
    for (int it = 0; it < 1000; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (auto w : tokens) {
            double z = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                resp[k] = theta[k] * model.p(k, w);
                z += resp[k];
            }
            for (std::size_t k = 0; k < K; ++k) next[k] += resp[k] / z;
        }
        double delta = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            next[k] /= static_cast<double>(tokens.size());
            delta = std::max(delta, std::abs(next[k] - theta[k]));
        }
        theta.swap(next);
        if (delta < 1e-13) break;
    }
    const double s = std::accumulate(theta.begin(), theta.end(), 0.0);
    for (auto& t : theta) t /= s;
    return theta;
}

void assign_topic_types(TopicModel& model, const std::vector<std::vector<TokenId>>& type_seeds, std::size_t top_n) {
    const std::size_t T = std::min(type_seeds.size(), kEdaTypes.size());
    model.topic_types.assign(model.K, EdaType::Unknown);
    if (T == 0 || model.K == 0) return;
    std::vector<std::vector<double>> overlap(model.K, std::vector<double>(T, 0.0));
    for (std::size_t k = 0; k < model.K; ++k) {
        const auto top = model.top_tokens(k, top_n);
        const std::set<TokenId> top_set(top.begin(), top.end());
        for (std::size_t t = 0; t < T; ++t) {
            for (auto w : type_seeds[t]) overlap[k][t] += top_set.count(w) ? 1.0 : 0.0;
        }
    }
    if (model.K <= T) {
        const auto match = max_weight_assignment(overlap);
        for (std::size_t k = 0; k < model.K; ++k) model.topic_types[k] = kEdaTypes[match[k]];
    } else {
        std::vector<std::vector<double>> by_type(T, std::vector<double>(model.K));
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t k = 0; k < model.K; ++k) by_type[t][k] = overlap[k][t];
        }
        const auto match = max_weight_assignment(by_type);
        for (std::size_t t = 0; t < T; ++t) model.topic_types[match[t]] = kEdaTypes[t];
    }
}

void save_topic_model(const TopicModel& model, std::ostream& out) {
    using namespace binary;
    write_magic(out, "EDAT");
    write_le<std::uint16_t>(out, kTopicFormatVersion);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.K));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.V));
    write_le<double>(out, model.alpha);
    write_le<double>(out, model.beta);
    write_le<double>(out, model.seed_boost);
    write_le<std::uint64_t>(out, model.rng_seed);
    write_le<std::uint64_t>(out, model.iterations);
    for (double v : model.phi) write_le<double>(out, v);
    for (std::size_t k = 0; k < model.K; ++k) {
        const auto t = k < model.topic_types.size() ? model.topic_types[k] : EdaType::Unknown;
        write_le<std::uint8_t>(out, static_cast<std::uint8_t>(t));
    }
    for (std::size_t k = 0; k < model.K; ++k) {
        const auto& s = k < model.seeds.size() ? model.seeds[k] : std::vector<TokenId>{};
        write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
        for (auto w : s) write_le<std::uint32_t>(out, w);
    }
}

TopicModel load_topic_model(std::istream& in) {
    using namespace binary;
    expect_magic(in, "EDAT");
    if (read_le<std::uint16_t>(in) != kTopicFormatVersion) throw Error(ErrorCode::FormatError, "unsupported topic model version");
    TopicModel m;
    m.K = read_le<std::uint32_t>(in);
    m.V = read_le<std::uint32_t>(in);
    m.alpha = read_le<double>(in);
    m.beta = read_le<double>(in);
    m.seed_boost = read_le<double>(in);
    m.rng_seed = read_le<std::uint64_t>(in);
    m.iterations = read_le<std::uint64_t>(in);
    m.phi.resize(m.K * m.V);
    for (auto& v : m.phi) v = read_le<double>(in);
    m.topic_types.resize(m.K);
    for (auto& t : m.topic_types) {
        const auto raw = read_le<std::uint8_t>(in);
        if (raw > static_cast<std::uint8_t>(EdaType::Unknown)) throw Error(ErrorCode::FormatError, "bad eda type");
        t = static_cast<EdaType>(raw);
    }
    m.seeds.resize(m.K);
    bool any = false;
    for (auto& s : m.seeds) {
        s.resize(read_le<std::uint32_t>(in));
        for (auto& w : s) w = read_le<std::uint32_t>(in);
        any = any || !s.empty();
    }
    if (!any) m.seeds.clear();
    return m;
}

void save_topic_model(const TopicModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    save_topic_model(model, out);
}

TopicModel load_topic_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    return load_topic_model(in);
}

}  // namespace edascope
