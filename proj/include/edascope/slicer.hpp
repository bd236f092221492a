#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edascope/notebook.hpp"
#include "edascope/types.hpp"

namespace edascope {

// Names a cell binds at module scope and the free names it reads.
struct DefUse {
    std::size_t cell_index = 0;
    std::set<std::string> defined;
    std::set<std::string> used;
    bool parse_failed = false;
};

// Module-level def/use of a code cell. Magics are stripped first. A cell
// that does not tokenize yields empty sets with parse_failed set.
DefUse defs_uses(std::string_view cell_source);

struct CodeBlock {
    std::size_t ordinal = 0;
    std::vector<std::string> source;
    std::size_t origin_cell = 0;
    std::vector<TokenId> api_tokens;  // filled by the analyzer
    EdaType eda_type = EdaType::Unknown;
    std::vector<std::pair<std::string, double>> keywords;

    std::string text() const;
};

struct EDASequence {
    std::string id;
    std::string notebook_id;
    std::vector<std::size_t> member_cells;  // ascending
    std::vector<CodeBlock> blocks;          // one per member cell, same order
    std::size_t sink_cell = 0;
    std::set<std::string> external_names;

    // Concatenated block sources separated by blank lines.
    std::string script() const;
};

struct SliceOptions {
    // Call patterns that make a cell a sink: an exact callee (`print`) or a
    // method suffix (`*.show`).
    std::vector<std::string> output_apis = default_output_apis();

    static std::vector<std::string> default_output_apis();
};

// Per-cell facts shared by sink detection and slicing.
struct CellFacts {
    DefUse def_use;
    bool trailing_expression = false;
    bool calls_output_api = false;
};

class NotebookAnalysis {
public:
    NotebookAnalysis(const Notebook& notebook, const SliceOptions& options = {});

    const Notebook& notebook() const { return notebook_; }
    const CellFacts& facts(std::size_t cell) const { return facts_.at(cell); }

    // Nearest cell strictly before `before` that defines `name`.
    std::optional<std::size_t> nearest_definer(const std::string& name, std::size_t before) const;

private:
    const Notebook& notebook_;
    std::vector<CellFacts> facts_;
};

std::set<std::size_t> detect_sinks(const Notebook& notebook, const SliceOptions& options = {});
std::set<std::size_t> detect_sinks(const NotebookAnalysis& analysis);

// Least set of cells containing `sink` that is closed under "each used name
// pulls in its nearest preceding definer". Throws Error(InvalidArgument) when
// `sink` is not a code cell of the notebook.
EDASequence backward_slice(const Notebook& notebook, std::size_t sink);
EDASequence backward_slice(const NotebookAnalysis& analysis, std::size_t sink);

// One sequence per sink, ordered by sink, duplicates (same member set)
// dropped.
std::vector<EDASequence> slice_notebook(const Notebook& notebook, const SliceOptions& options = {});

std::string sequence_id(std::string_view notebook_id, std::size_t sink);

}  // namespace edascope
