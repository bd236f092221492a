#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "edascope/slicer.hpp"
#include "edascope/topic_model.hpp"
#include "edascope/types.hpp"

namespace edascope {

// How method calls on plain variables are named.
//   Untracked: `m.fit()` -> `*.fit`
//   OneStep:   a variable assigned directly from a resolved library call
//              keeps that library root: `m.fit()` -> `sklearn.*.fit`
enum class ReceiverPolicy { Untracked, OneStep };

struct ImportEnv {
    std::map<std::string, std::string> aliases;    // local name -> dotted path
    std::map<std::string, std::string> receivers;  // variable -> library root (OneStep)
};

struct ExtractOptions {
    ReceiverPolicy receivers = ReceiverPolicy::Untracked;
    // Roots kept after resolution; `*` keeps untracked method calls. Empty
    // disables filtering.
    std::vector<std::string> allowlist = default_allowlist();

    static std::vector<std::string> default_allowlist();
};

// Import bindings of a group of blocks in order; later bindings win.
// Receivers start empty.
ImportEnv build_import_env(const std::vector<std::string>& block_sources, const ExtractOptions& options = {});

// Advances env.receivers past the top-level assignments of a block (OneStep).
void update_receivers(ImportEnv& env, std::string_view block, const ExtractOptions& options = {});

struct ApiCalls {
    std::vector<std::string> tokens;  // canonical names in call order
    bool parse_failed = false;
};

ApiCalls extract_api_calls(std::string_view block, const ImportEnv& env, const ExtractOptions& options = {});

class Vocabulary {
public:
    Vocabulary() = default;
    // Ids follow the sorted order of the distinct tokens.
    explicit Vocabulary(const std::vector<std::string>& tokens);

    std::optional<TokenId> id(std::string_view canonical) const;
    const std::string& canonical(TokenId id) const { return tokens_.at(id); }
    std::size_t size() const { return tokens_.size(); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    // Ids of the known tokens, unknown ones dropped.
    std::vector<TokenId> encode(const std::vector<std::string>& tokens) const;

    void save(const std::filesystem::path& path) const;  // one token per line
    static Vocabulary load(const std::filesystem::path& path);

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> ids_;
};

// Document frequencies over sequences-as-documents.
struct DocumentFrequency {
    std::size_t documents = 0;
    std::map<std::string, std::size_t, std::less<>> df;

    void add_document(const std::vector<std::string>& tokens);
};

// tf * ln((1 + N) / (1 + df)); descending by score, equal scores by
// descending tf, then lexicographic.
// An empty document gives an empty list.
std::vector<std::pair<std::string, double>> tfidf_keywords(const std::vector<std::string>& sequence_tokens,
                                                           const DocumentFrequency& corpus_df, std::size_t m);

// argmax_k sum ln p(t | k) under a uniform prior, mapped through
// model.topic_types. Tokens outside the model vocabulary are ignored; no
// usable tokens gives Unknown.
EdaType classify_block(const std::vector<TokenId>& block_tokens, const TopicModel& model);

// Canonical seed tokens for each EDA type, indexed like kEdaTypes.
const std::vector<std::vector<std::string>>& default_type_seeds();

// Per-sequence analyzer output.
struct SequenceAnalysis {
    std::string sequence_id;
    std::string notebook_id;
    std::vector<std::vector<TokenId>> block_tokens;  // vocab ids, one list per block
    std::vector<EdaType> block_types;
    std::vector<std::pair<std::string, double>> keywords;
    std::size_t parse_failures = 0;

    std::vector<TokenId> api_order() const;  // blocks concatenated
};

}  // namespace edascope
