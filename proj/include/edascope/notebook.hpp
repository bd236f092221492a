#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace edascope {

enum class CellKind { Code, Markdown };

struct Cell {
    std::size_t index = 0;
    CellKind kind = CellKind::Code;
    std::vector<std::string> source;  // canonical lines, no terminators
    bool has_stored_output = false;

    std::string text() const;
    bool operator==(const Cell&) const = default;
};

struct Notebook {
    std::string id;
    std::string source_path;
    std::vector<Cell> cells;
    std::size_t dropped_cells = 0;  // raw / unknown cell types

    std::size_t code_cell_count() const;
    std::size_t markdown_cell_count() const;
    bool operator==(const Notebook&) const = default;
};

struct CorpusStats {
    std::size_t notebook_count = 0;
    std::size_t code_cell_count = 0;
    std::size_t markdown_cell_count = 0;
    double median_code_cells_per_notebook = 0.0;
};

struct SkippedFile {
    std::string path;
    std::string reason;
};

struct Corpus {
    std::vector<Notebook> notebooks;  // ordered by relative path
    CorpusStats stats;
    std::vector<SkippedFile> skipped;
};

// Stable notebook id derived from the (relative) path.
std::string notebook_id_for_path(std::string_view path);

// Splits a text blob into canonical lines (no terminators, CRLF folded, a
// single trailing newline does not produce an empty last line).
std::vector<std::string> split_lines(std::string_view text);

// Parses an nbformat-4 document. Throws Error(MalformedDocument) or
// Error(UnsupportedFormat).
Notebook parse_notebook(std::string_view raw_bytes, std::string_view path);

// Writes the notebook back as an nbformat-4 document.
nlohmann::json to_ipynb(const Notebook& notebook);

CorpusStats compute_stats(const std::vector<Notebook>& notebooks);

// Recursively parses every *.ipynb below root. Malformed files are reported
// in Corpus::skipped, never thrown. Throws Error(IoError) when root is not a
// readable directory.
Corpus scan_corpus(const std::filesystem::path& root);

}  // namespace edascope
