#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "edascope/analyzer.hpp"
#include "edascope/embedding.hpp"
#include "edascope/slicer.hpp"
#include "edascope/topic_model.hpp"

namespace edascope {

// Canonical API tokens of each block of one sequence. Imports are resolved
// against all blocks of the sequence; receivers (OneStep) advance block by
// block.
struct SequenceTokens {
    std::vector<std::vector<std::string>> blocks;
    std::size_t parse_failures = 0;

    std::vector<std::string> flattened() const;
};

SequenceTokens extract_sequence_tokens(const EDASequence& sequence, const ExtractOptions& options = {});

struct AnalyzeOptions {
    ExtractOptions extract;
    std::size_t keywords = 10;
};

struct CorpusAnalysis {
    Vocabulary vocabulary;
    DocumentFrequency df;
    std::vector<SequenceAnalysis> sequences;  // same order as the input; block types Unknown
};

CorpusAnalysis analyze_corpus(const std::vector<EDASequence>& sequences, const AnalyzeOptions& options = {});

// default_type_seeds() restricted to the vocabulary.
std::vector<std::vector<TokenId>> vocabulary_type_seeds(const Vocabulary& vocabulary);

struct TopicTrainingOptions {
    LdaParams lda;
    double seed_boost = 10.0;
    bool guided = true;
};

// Blocks are the LDA documents; a cell shared by several sequences counts
// once. Topics are labelled with EDA types by seed overlap.
TopicModel train_block_topics(const std::vector<EDASequence>& sequences, const std::vector<SequenceAnalysis>& analyses,
                              const Vocabulary& vocabulary, const TopicTrainingOptions& options = {});

void label_blocks(std::vector<SequenceAnalysis>& analyses, const TopicModel& model);

// ---- queries ----

// Lines starting with "# %%" separate cells.
std::vector<std::string> split_query_cells(std::string_view code);

// Blocks of a sequence joined with cell markers, the inverse of
// split_query_cells.
std::string sequence_query_text(const EDASequence& sequence);

struct QueryAnalysis {
    EDASequence sequence;  // slice ending at the last non-blank cell
    std::vector<std::vector<std::string>> canonical;
    BlockTokens block_tokens;  // vocabulary ids
};

// Throws EmptyQuery when no known API token can be extracted.
QueryAnalysis analyze_query(std::string_view code, const Vocabulary& vocabulary, const ExtractOptions& options = {});

}  // namespace edascope
