#include "edascope/slicer.hpp"

#include <algorithm>
#include <map>

#include "cell_analysis.hpp"
#include "edascope/error.hpp"
#include "edascope/python_parser.hpp"

namespace edascope {

std::string CodeBlock::text() const {
    std::string out;
    for (std::size_t i = 0; i < source.size(); ++i) {
        if (i) out += '\n';
        out += source[i];
    }
    return out;
}

std::string EDASequence::script() const {
    std::string out;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (i) out += "\n\n";
        out += blocks[i].text();
    }
    return out;
}

std::vector<std::string> SliceOptions::default_output_apis() {
    return {"print",      "display",      "*.show",      "*.plot",     "*.imshow",  "*.hist",
            "*.scatter",  "*.bar",        "*.barh",      "*.pie",      "*.boxplot", "*.heatmap",
            "*.countplot", "*.barplot",   "*.lineplot",  "*.scatterplot", "*.histplot", "*.distplot",
            "*.kdeplot",  "*.pairplot",   "*.violinplot", "*.jointplot", "*.catplot", "*.regplot"};
}

std::string sequence_id(std::string_view notebook_id, std::size_t sink) {
    return std::string(notebook_id) + "-c" + std::to_string(sink);
}

NotebookAnalysis::NotebookAnalysis(const Notebook& notebook, const SliceOptions& options) : notebook_(notebook) {
    facts_.resize(notebook.cells.size());
    for (const auto& cell : notebook.cells) {
        CellFacts& f = facts_[cell.index];
        f.def_use.cell_index = cell.index;
        if (cell.kind != CellKind::Code) continue;
        auto syntax = detail::analyze_cell(cell.text());
        f.def_use = std::move(syntax.def_use);
        f.def_use.cell_index = cell.index;
        f.trailing_expression = syntax.trailing_expression;
        for (const auto* callee : syntax.callees) {
            for (const auto& pattern : options.output_apis) {
                if (detail::callee_matches(*callee, pattern)) f.calls_output_api = true;
            }
        }
    }
}

std::optional<std::size_t> NotebookAnalysis::nearest_definer(const std::string& name, std::size_t before) const {
    for (std::size_t i = std::min(before, facts_.size()); i-- > 0;) {
        if (notebook_.cells[i].kind == CellKind::Code && facts_[i].def_use.defined.count(name)) return i;
    }
    return std::nullopt;
}

std::set<std::size_t> detect_sinks(const NotebookAnalysis& analysis) {
    std::set<std::size_t> sinks;
    for (const auto& cell : analysis.notebook().cells) {
        if (cell.kind != CellKind::Code) continue;
        const auto& f = analysis.facts(cell.index);
        if (cell.has_stored_output || f.trailing_expression || f.calls_output_api) sinks.insert(cell.index);
    }
    return sinks;
}

std::set<std::size_t> detect_sinks(const Notebook& notebook, const SliceOptions& options) {
    return detect_sinks(NotebookAnalysis(notebook, options));
}

EDASequence backward_slice(const NotebookAnalysis& analysis, std::size_t sink) {
    const Notebook& nb = analysis.notebook();
    if (sink >= nb.cells.size() || nb.cells[sink].kind != CellKind::Code) {
        throw Error(ErrorCode::InvalidArgument, "slice target is not a code cell: " + std::to_string(sink));
    }
    EDASequence seq;
    seq.id = sequence_id(nb.id, sink);
    seq.notebook_id = nb.id;
    seq.sink_cell = sink;

    std::set<std::size_t> members{sink};
    std::vector<std::size_t> work{sink};
    while (!work.empty()) {
        const std::size_t cell = work.back();
        work.pop_back();
        for (const auto& name : analysis.facts(cell).def_use.used) {
            if (const auto def = analysis.nearest_definer(name, cell)) {
                if (members.insert(*def).second) work.push_back(*def);
            } else if (!python::is_builtin(name)) {
                seq.external_names.insert(name);
            }
        }
    }

    seq.member_cells.assign(members.begin(), members.end());
    for (const auto idx : seq.member_cells) {
        CodeBlock block;
        block.ordinal = seq.blocks.size();
        block.origin_cell = idx;
        block.source = nb.cells[idx].source;
        seq.blocks.push_back(std::move(block));
    }
    return seq;
}

EDASequence backward_slice(const Notebook& notebook, std::size_t sink) {
    return backward_slice(NotebookAnalysis(notebook), sink);
}

std::vector<EDASequence> slice_notebook(const Notebook& notebook, const SliceOptions& options) {
    const NotebookAnalysis analysis(notebook, options);
    std::vector<EDASequence> out;
    std::set<std::vector<std::size_t>> seen;
    for (const auto sink : detect_sinks(analysis)) {
        if (notebook.cells[sink].source.empty()) continue;
        auto seq = backward_slice(analysis, sink);
        if (seen.insert(seq.member_cells).second) out.push_back(std::move(seq));
    }
    return out;
}

}  // namespace edascope
