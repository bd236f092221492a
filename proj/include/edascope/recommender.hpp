#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edascope/analyzer.hpp"
#include "edascope/embedding.hpp"
#include "edascope/search_index.hpp"

namespace edascope {

enum class TargetMode { NextBlock, AllRemaining };

struct TrainingPair {
    std::string sequence_id;
    BlockTokens prefix;           // blocks 1..n
    std::vector<TokenId> target;  // sorted, distinct
};

// n = 1..N-1 per sequence; pairs with an empty target are dropped.
std::vector<TrainingPair> make_training_pairs(const std::vector<SequenceAnalysis>& analyses,
                                              TargetMode mode = TargetMode::NextBlock);

enum class RecommenderKind { RetrievalBased = 0, LinearHead = 1 };

std::string_view recommender_kind_name(RecommenderKind kind);

struct LinearHeadParams {
    std::size_t epochs = 20;
    double learning_rate = 0.5;
    std::uint64_t seed = 7;
};

struct RecommenderModel {
    RecommenderKind kind = RecommenderKind::RetrievalBased;
    std::string id;
    double threshold = 0.5;
    std::size_t dim = 0;
    std::size_t vocabulary = 0;

    // LinearHead
    std::vector<float> weights;  // V x D row-major
    std::vector<float> bias;     // V
    LinearHeadParams params;
    std::vector<double> epoch_loss;  // not serialized

    // RetrievalBased
    std::size_t neighbors = 10;

    void save(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;
    static RecommenderModel load(std::istream& in);
    static RecommenderModel load(const std::filesystem::path& path);
};

// Independent sigmoid per token, binary cross-entropy, plain SGD over the
// L2-normalized prefix embeddings, zero initialization. Pairs whose prefix
// has no tokens are skipped. Throws InvalidHyperparameter / InvalidArgument.
RecommenderModel train_linear_head(const std::vector<TrainingPair>& pairs, const Encoder& encoder,
                                   std::size_t vocabulary, const LinearHeadParams& params = {});

RecommenderModel make_retrieval_recommender(std::size_t neighbors = 10);

struct Recommendation {
    std::vector<std::pair<TokenId, double>> items;  // non-increasing probability, ties by id
    std::string model_id;
};

// Scores every candidate token for a prefix. For RetrievalBased, the index
// supplies neighbors; `exclude` drops one sequence id from them (used when
// evaluating on indexed sequences).
Recommendation recommend_for_prefix(const BlockTokens& prefix, const RecommenderModel& model, const Encoder& encoder,
                                    const SequenceIndex& index, std::size_t limit, std::string_view exclude = {});

// Throws EmptyQuery.
Recommendation recommend(std::string_view query_code, const RecommenderModel& model, const Encoder& encoder,
                         const SequenceIndex& index, const Vocabulary& vocabulary, std::size_t limit,
                         const ExtractOptions& options = {});

struct RecommenderScores {
    double accuracy = 0.0;
    double iou = 0.0;
    std::size_t pairs = 0;
    std::vector<double> pair_accuracy;
    std::vector<double> pair_iou;
};

// |pred & truth| / |truth| and |pred & truth| / |pred | truth| per pair.
// An empty prediction and an empty truth give 1 for both.
std::pair<double, double> set_scores(const std::vector<TokenId>& predicted, const std::vector<TokenId>& truth);

// Predicted set = tokens with probability > threshold. Pairs with an empty
// prefix embedding predict nothing.
RecommenderScores eval_recommender(const std::vector<TrainingPair>& pairs, const RecommenderModel& model,
                                   const Encoder& encoder, const SequenceIndex& index, double threshold);

// Expected IOU of predicting |truth| tokens uniformly at random from the
// vocabulary, estimated by Monte Carlo.
double random_predictor_iou(const std::vector<TrainingPair>& pairs, std::size_t vocabulary, std::size_t trials,
                            std::uint64_t seed);

// Library root -> documentation URL template; "{name}" is replaced by the
// full canonical token, "{member}" by its last component.
using DocUrlTemplates = std::map<std::string, std::string>;

const DocUrlTemplates& default_doc_url_templates();
std::string documentation_url(std::string_view canonical, const DocUrlTemplates& templates = default_doc_url_templates());

}  // namespace edascope
