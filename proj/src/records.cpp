#include "edascope/records.hpp"

#include <fstream>

#include "edascope/error.hpp"

namespace edascope::records {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) throw Error(ErrorCode::FormatError, std::string("record lacks field '") + key + "'");
    return *it;
}

template <typename T>
T get(const json& j, const char* key) {
    try {
        return field(j, key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("bad field '") + key + "': " + e.what());
    }
}

}  // namespace

json notebook_to_json(const Notebook& nb) {
    json cells = json::array();
    for (const auto& c : nb.cells) {
        cells.push_back({{"index", c.index},
                         {"kind", c.kind == CellKind::Code ? "code" : "markdown"},
                         {"source", c.source},
                         {"has_stored_output", c.has_stored_output}});
    }
    return {{"type", "notebook"},
            {"id", nb.id},
            {"path", nb.source_path},
            {"dropped_cells", nb.dropped_cells},
            {"cells", cells}};
}

Notebook notebook_from_json(const json& j) {
    Notebook nb;
    nb.id = get<std::string>(j, "id");
    nb.source_path = get<std::string>(j, "path");
    nb.dropped_cells = get<std::size_t>(j, "dropped_cells");
    for (const auto& c : field(j, "cells")) {
        Cell cell;
        cell.index = get<std::size_t>(c, "index");
        const auto kind = get<std::string>(c, "kind");
        if (kind != "code" && kind != "markdown") throw Error(ErrorCode::FormatError, "unknown cell kind " + kind);
        cell.kind = kind == "code" ? CellKind::Code : CellKind::Markdown;
        cell.source = get<std::vector<std::string>>(c, "source");
        cell.has_stored_output = get<bool>(c, "has_stored_output");
        if (cell.index != nb.cells.size()) throw Error(ErrorCode::FormatError, "cell indices must be contiguous");
        nb.cells.push_back(std::move(cell));
    }
    return nb;
}

json stats_to_json(const CorpusStats& s) {
    return {{"type", "corpus_stats"},
            {"notebook_count", s.notebook_count},
            {"code_cell_count", s.code_cell_count},
            {"markdown_cell_count", s.markdown_cell_count},
            {"median_code_cells_per_notebook", s.median_code_cells_per_notebook}};
}

json sequence_to_json(const EDASequence& seq) {
    json blocks = json::array();
    for (const auto& b : seq.blocks) {
        blocks.push_back({{"ordinal", b.ordinal}, {"origin_cell", b.origin_cell}, {"source", b.source}});
    }
    return {{"type", "sequence"},
            {"id", seq.id},
            {"notebook_id", seq.notebook_id},
            {"sink_cell", seq.sink_cell},
            {"member_cells", seq.member_cells},
            {"external_names", seq.external_names},
            {"blocks", blocks}};
}

EDASequence sequence_from_json(const json& j) {
    EDASequence seq;
    seq.id = get<std::string>(j, "id");
    seq.notebook_id = get<std::string>(j, "notebook_id");
    seq.sink_cell = get<std::size_t>(j, "sink_cell");
    seq.member_cells = get<std::vector<std::size_t>>(j, "member_cells");
    seq.external_names = get<std::set<std::string>>(j, "external_names");
    for (const auto& b : field(j, "blocks")) {
        CodeBlock block;
        block.ordinal = get<std::size_t>(b, "ordinal");
        block.origin_cell = get<std::size_t>(b, "origin_cell");
        block.source = get<std::vector<std::string>>(b, "source");
        seq.blocks.push_back(std::move(block));
    }
    if (seq.blocks.size() != seq.member_cells.size()) throw Error(ErrorCode::FormatError, "block count differs from member cells");
    return seq;
}

json analysis_to_json(const SequenceAnalysis& a) {
    json blocks = json::array();
    for (std::size_t i = 0; i < a.block_tokens.size(); ++i) {
        const auto type = i < a.block_types.size() ? a.block_types[i] : EdaType::Unknown;
        blocks.push_back({{"tokens", a.block_tokens[i]}, {"eda_type", eda_type_name(type)}});
    }
    json keywords = json::array();
    for (const auto& [t, s] : a.keywords) keywords.push_back({t, s});
    return {{"type", "analysis"},
            {"sequence_id", a.sequence_id},
            {"notebook_id", a.notebook_id},
            {"api_order", a.api_order()},
            {"blocks", blocks},
            {"keywords", keywords},
            {"parse_failures", a.parse_failures}};
}

SequenceAnalysis analysis_from_json(const json& j) {
    SequenceAnalysis a;
    a.sequence_id = get<std::string>(j, "sequence_id");
    a.notebook_id = get<std::string>(j, "notebook_id");
    a.parse_failures = get<std::size_t>(j, "parse_failures");
    for (const auto& b : field(j, "blocks")) {
        a.block_tokens.push_back(get<std::vector<TokenId>>(b, "tokens"));
        const auto name = get<std::string>(b, "eda_type");
        const auto type = eda_type_from_name(name);
        if (!type) throw Error(ErrorCode::FormatError, "unknown eda type " + name);
        a.block_types.push_back(*type);
    }
    for (const auto& kw : field(j, "keywords")) {
        if (!kw.is_array() || kw.size() != 2) throw Error(ErrorCode::FormatError, "keyword entries are [token, score]");
        a.keywords.emplace_back(kw[0].get<std::string>(), kw[1].get<double>());
    }
    return a;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    for (const auto& j : lines) out << j.dump() << '\n';
}

void read_jsonl(const std::filesystem::path& path, const std::function<void(const json&)>& visit) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::FormatError, path.string() + ":" + std::to_string(n) + ": " + e.what());
        }
        visit(j);
    }
}

namespace {

template <typename T, typename F>
std::vector<T> read_typed(const std::filesystem::path& path, const char* type, F&& convert) {
    std::vector<T> out;
    read_jsonl(path, [&](const json& j) {
        if (j.value("type", "") == type) out.push_back(convert(j));
    });
    return out;
}

}  // namespace

std::vector<Notebook> read_notebooks(const std::filesystem::path& path) {
    return read_typed<Notebook>(path, "notebook", notebook_from_json);
}

std::vector<EDASequence> read_sequences(const std::filesystem::path& path) {
    return read_typed<EDASequence>(path, "sequence", sequence_from_json);
}

std::vector<SequenceAnalysis> read_analyses(const std::filesystem::path& path) {
    return read_typed<SequenceAnalysis>(path, "analysis", analysis_from_json);
}

}  // namespace edascope::records
