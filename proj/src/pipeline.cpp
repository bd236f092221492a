#include "edascope/pipeline.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "edascope/error.hpp"
#include "edascope/notebook.hpp"

namespace edascope {

std::vector<std::string> SequenceTokens::flattened() const {
    std::vector<std::string> out;
    for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
    return out;
}

SequenceTokens extract_sequence_tokens(const EDASequence& sequence, const ExtractOptions& options) {
    std::vector<std::string> sources;
    sources.reserve(sequence.blocks.size());
    for (const auto& b : sequence.blocks) sources.push_back(b.text());
    auto env = build_import_env(sources, options);

    SequenceTokens out;
    for (const auto& src : sources) {
        auto calls = extract_api_calls(src, env, options);
        out.parse_failures += calls.parse_failed;
        out.blocks.push_back(std::move(calls.tokens));
        if (options.receivers == ReceiverPolicy::OneStep) update_receivers(env, src, options);
    }
    return out;
}

CorpusAnalysis analyze_corpus(const std::vector<EDASequence>& sequences, const AnalyzeOptions& options) {
    std::vector<SequenceTokens> tokens;
    tokens.reserve(sequences.size());
    CorpusAnalysis out;
    std::vector<std::string> all;
    for (const auto& seq : sequences) {
        tokens.push_back(extract_sequence_tokens(seq, options.extract));
        const auto flat = tokens.back().flattened();
        out.df.add_document(flat);
        all.insert(all.end(), flat.begin(), flat.end());
    }
    out.vocabulary = Vocabulary(all);

    for (std::size_t i = 0; i < sequences.size(); ++i) {
        SequenceAnalysis a;
        a.sequence_id = sequences[i].id;
        a.notebook_id = sequences[i].notebook_id;
        a.parse_failures = tokens[i].parse_failures;
        for (const auto& b : tokens[i].blocks) a.block_tokens.push_back(out.vocabulary.encode(b));
        a.block_types.assign(a.block_tokens.size(), EdaType::Unknown);
        a.keywords = tfidf_keywords(tokens[i].flattened(), out.df, options.keywords);
        out.sequences.push_back(std::move(a));
    }
    return out;
}

std::vector<std::vector<TokenId>> vocabulary_type_seeds(const Vocabulary& vocabulary) {
    std::vector<std::vector<TokenId>> out;
    for (const auto& list : default_type_seeds()) {
        std::vector<TokenId> ids;
        for (const auto& t : list) {
            if (auto id = vocabulary.id(t)) ids.push_back(*id);
        }
        out.push_back(std::move(ids));
    }
    return out;
}

TopicModel train_block_topics(const std::vector<EDASequence>& sequences, const std::vector<SequenceAnalysis>& analyses,
                              const Vocabulary& vocabulary, const TopicTrainingOptions& options) {
    if (sequences.size() != analyses.size()) throw Error(ErrorCode::InvalidArgument, "sequences and analyses differ in length");
    if (vocabulary.size() == 0) throw Error(ErrorCode::EmptyDocument, "no API tokens in the corpus");

    std::set<std::pair<std::string, std::size_t>> seen;
    std::vector<std::vector<TokenId>> docs;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        const auto& seq = sequences[i];
        const auto& a = analyses[i];
        if (seq.blocks.size() != a.block_tokens.size()) throw Error(ErrorCode::InvalidArgument, "block count mismatch for " + seq.id);
        for (std::size_t b = 0; b < seq.blocks.size(); ++b) {
            if (a.block_tokens[b].empty()) continue;
            if (!seen.emplace(seq.notebook_id, seq.blocks[b].origin_cell).second) continue;
            docs.push_back(a.block_tokens[b]);
        }
    }

    const auto type_seeds = vocabulary_type_seeds(vocabulary);
    TopicModel model;
    if (options.guided) {
        auto seeds = type_seeds;
        if (seeds.size() > options.lda.topics) seeds.resize(options.lda.topics);
        model = train_guided_lda(docs, vocabulary.size(), seeds, options.seed_boost, options.lda);
    } else {
        model = train_lda(docs, vocabulary.size(), options.lda);
    }
    assign_topic_types(model, type_seeds);
    return model;
}

void label_blocks(std::vector<SequenceAnalysis>& analyses, const TopicModel& model) {
    for (auto& a : analyses) {
        a.block_types.clear();
        for (const auto& b : a.block_tokens) a.block_types.push_back(classify_block(b, model));
    }
}

namespace {

bool is_marker(std::string_view line) {
    const auto start = line.find_first_not_of(" \t");
    return start != std::string_view::npos && line.substr(start).rfind("# %%", 0) == 0;
}

bool blank(const std::vector<std::string>& lines) {
    return std::all_of(lines.begin(), lines.end(),
                       [](const std::string& l) { return l.find_first_not_of(" \t") == std::string::npos; });
}

}  // namespace

std::vector<std::string> split_query_cells(std::string_view code) {
    std::vector<std::string> cells(1);
    bool fresh = true;
    for (const auto& line : split_lines(code)) {
        if (is_marker(line)) {
            cells.emplace_back();
            fresh = true;
            continue;
        }
        if (!fresh) cells.back() += '\n';
        cells.back() += line;
        fresh = false;
    }
    return cells;
}

std::string sequence_query_text(const EDASequence& sequence) {
    std::string out;
    for (const auto& b : sequence.blocks) {
        out += "# %%\n";
        for (const auto& line : b.source) {
            out += line;
            out += '\n';
        }
    }
    return out;
}

QueryAnalysis analyze_query(std::string_view code, const Vocabulary& vocabulary, const ExtractOptions& options) {
    Notebook nb;
    nb.id = "query";
    std::optional<std::size_t> sink;
    for (const auto& text : split_query_cells(code)) {
        Cell c;
        c.index = nb.cells.size();
        c.source = split_lines(text);
        if (blank(c.source)) continue;
        sink = c.index;
        nb.cells.push_back(std::move(c));
    }
    if (!sink) throw Error(ErrorCode::EmptyQuery, "query has no code");

    QueryAnalysis q;
    q.sequence = backward_slice(nb, *sink);
    auto tokens = extract_sequence_tokens(q.sequence, options);
    bool any = false;
    for (auto& b : tokens.blocks) {
        q.block_tokens.push_back(vocabulary.encode(b));
        any = any || !q.block_tokens.back().empty();
        q.canonical.push_back(std::move(b));
    }
    if (!any) throw Error(ErrorCode::EmptyQuery, "no known API calls in the query");
    return q;
}

}  // namespace edascope
