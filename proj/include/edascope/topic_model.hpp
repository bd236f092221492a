#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "edascope/types.hpp"

namespace edascope {

struct LdaParams {
    std::size_t topics = 4;
    double alpha = 0.0;  // <= 0 means 50 / topics
    double beta = 0.01;
    std::size_t iterations = 1000;
    std::uint64_t seed = 0;
};

struct TopicModel {
    std::size_t K = 0;
    std::size_t V = 0;
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t iterations = 0;
    std::vector<double> phi;  // K x V row-major, p(token | topic)
    std::vector<std::vector<TokenId>> seeds;  // per topic, empty when unseeded
    double seed_boost = 1.0;
    std::uint64_t rng_seed = 0;
    std::vector<EdaType> topic_types;  // K entries, Unknown when unassigned

    double p(std::size_t topic, TokenId token) const { return phi[topic * V + token]; }

    // The n most probable tokens of a topic, ties by ascending id.
    std::vector<TokenId> top_tokens(std::size_t topic, std::size_t n) const;
};

// Collapsed Gibbs LDA. docs hold token ids < V; empty documents are skipped.
// Throws InvalidHyperparameter for K < 1, alpha/beta <= 0, iterations < 1 or
// V < 1, and InvalidArgument for out-of-range ids.
TopicModel train_lda(const std::vector<std::vector<TokenId>>& docs, std::size_t V, const LdaParams& params);

// Seeded variant: seeds[k] lists tokens tied to topic k. Initial assignment
// of a seeded token favors its topic with weight seed_boost, and its sampling
// weight for that topic is multiplied by seed_boost. Throws SeedConflict when
// a token is seeded to two topics.
TopicModel train_guided_lda(const std::vector<std::vector<TokenId>>& docs, std::size_t V,
                            const std::vector<std::vector<TokenId>>& seeds, double seed_boost,
                            const LdaParams& params);

// Document-topic proportions under fixed phi (EM fixed point). Empty or
// fully out-of-vocabulary documents give the uniform vector.
std::vector<double> infer_mixture(const std::vector<TokenId>& doc, const TopicModel& model);

// Assigns an EDA type to each topic by maximum-overlap matching between the
// topic's top_n tokens and per-type seed lists (indexed like kEdaTypes).
void assign_topic_types(TopicModel& model, const std::vector<std::vector<TokenId>>& type_seeds,
                        std::size_t top_n = 30);

void save_topic_model(const TopicModel& model, std::ostream& out);
TopicModel load_topic_model(std::istream& in);
void save_topic_model(const TopicModel& model, const std::filesystem::path& path);
TopicModel load_topic_model(const std::filesystem::path& path);

}  // namespace edascope
