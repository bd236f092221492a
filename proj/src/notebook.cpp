#include "edascope/notebook.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "edascope/error.hpp"
#include "edascope/util.hpp"

namespace edascope {

using nlohmann::json;

std::string Cell::text() const {
    std::string out;
    for (std::size_t i = 0; i < source.size(); ++i) {
        if (i) out += '\n';
        out += source[i];
    }
    return out;
}

std::size_t Notebook::code_cell_count() const {
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](const Cell& c) { return c.kind == CellKind::Code; }));
}

std::size_t Notebook::markdown_cell_count() const {
    return cells.size() - code_cell_count();
}

std::string notebook_id_for_path(std::string_view path) {
    return hex64(fnv1a(path));
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    if (text.empty()) return lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < text.size()) lines.emplace_back(text.substr(start));
            break;
        }
        lines.emplace_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    for (auto& line : lines) {
        while (!line.empty() && line.back() == '\r') line.pop_back();
    }
    return lines;
}

namespace {

std::string join_source(const json& source) {
    if (source.is_string()) return source.get<std::string>();
    if (!source.is_array()) throw Error(ErrorCode::MalformedDocument, "cell source is neither string nor list");
    std::string text;
    for (const auto& piece : source) {
        if (!piece.is_string()) throw Error(ErrorCode::MalformedDocument, "cell source list holds a non-string");
        text += piece.get<std::string>();
    }
    return text;
}

}  // namespace

Notebook parse_notebook(std::string_view raw_bytes, std::string_view path) {
    json doc = json::parse(raw_bytes.begin(), raw_bytes.end(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error(ErrorCode::MalformedDocument, "not a JSON object: " + std::string(path));
    }
    const auto fmt = doc.find("nbformat");
    if (fmt == doc.end() || !fmt->is_number_integer()) {
        throw Error(ErrorCode::MalformedDocument, "missing nbformat: " + std::string(path));
    }
    if (fmt->get<int>() != 4) {
        throw Error(ErrorCode::UnsupportedFormat,
                    "nbformat " + std::to_string(fmt->get<int>()) + " is not supported: " + std::string(path));
    }
    const auto cells = doc.find("cells");
    if (cells == doc.end() || !cells->is_array()) {
        throw Error(ErrorCode::MalformedDocument, "missing cells: " + std::string(path));
    }

    Notebook nb;
    nb.id = notebook_id_for_path(path);
    nb.source_path = std::string(path);
    for (const auto& raw : *cells) {
        if (!raw.is_object()) throw Error(ErrorCode::MalformedDocument, "cell is not an object");
        const std::string type = raw.value("cell_type", "");
        Cell cell;
        if (type == "code") {
            cell.kind = CellKind::Code;
            const auto outputs = raw.find("outputs");
            cell.has_stored_output = outputs != raw.end() && outputs->is_array() && !outputs->empty();
        } else if (type == "markdown") {
            cell.kind = CellKind::Markdown;
        } else {
            ++nb.dropped_cells;
            continue;
        }
        const auto source = raw.find("source");
        cell.source = split_lines(source == raw.end() ? std::string() : join_source(*source));
        cell.index = nb.cells.size();
        nb.cells.push_back(std::move(cell));
    }
    return nb;
}

json to_ipynb(const Notebook& notebook) {
    json cells = json::array();
    for (const auto& cell : notebook.cells) {
        json source = json::array();
        for (std::size_t i = 0; i < cell.source.size(); ++i) {
            // A trailing empty line needs its own terminator to survive re-splitting.
            const bool last = i + 1 == cell.source.size();
            source.push_back(!last || cell.source[i].empty() ? cell.source[i] + "\n" : cell.source[i]);
        }
        json c = {{"metadata", json::object()}, {"source", source}};
        if (cell.kind == CellKind::Code) {
            c["cell_type"] = "code";
            c["execution_count"] = nullptr;
            json outputs = json::array();
            if (cell.has_stored_output) {
                outputs.push_back({{"output_type", "stream"}, {"name", "stdout"}, {"text", json::array({"...\n"})}});
            }
            c["outputs"] = outputs;
        } else {
            c["cell_type"] = "markdown";
        }
        cells.push_back(std::move(c));
    }
    return json{{"nbformat", 4},
                {"nbformat_minor", 5},
                {"metadata", {{"language_info", {{"name", "python"}}}}},
                {"cells", std::move(cells)}};
}

CorpusStats compute_stats(const std::vector<Notebook>& notebooks) {
    CorpusStats stats;
    stats.notebook_count = notebooks.size();
    std::vector<std::size_t> per_notebook;
    per_notebook.reserve(notebooks.size());
    for (const auto& nb : notebooks) {
        const auto code = nb.code_cell_count();
        stats.code_cell_count += code;
        stats.markdown_cell_count += nb.markdown_cell_count();
        per_notebook.push_back(code);
    }
    if (!per_notebook.empty()) {
        std::sort(per_notebook.begin(), per_notebook.end());
        const auto n = per_notebook.size();
        stats.median_code_cells_per_notebook =
            n % 2 == 1 ? static_cast<double>(per_notebook[n / 2])
                       : 0.5 * static_cast<double>(per_notebook[n / 2 - 1] + per_notebook[n / 2]);
    }
    return stats;
}

namespace {

struct ParseOutcome {
    std::optional<Notebook> notebook;
    std::string error;
};

ParseOutcome parse_file(const std::filesystem::path& file, const std::string& relative) {
    std::ifstream in(file, std::ios::binary);
    if (!in) return {std::nullopt, "unreadable file"};
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return {parse_notebook(buf.str(), relative), {}};
    } catch (const Error& e) {
        return {std::nullopt, std::string(error_code_name(e.code())) + ": " + e.what()};
    }
}

}  // namespace

Corpus scan_corpus(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw Error(ErrorCode::IoError, "corpus root is not a readable directory: " + root.string());
    }

    std::vector<std::pair<std::string, fs::path>> files;
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot read corpus root: " + ec.message());
    for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) break;
        if (it->is_directory() && it->path().filename() == ".ipynb_checkpoints") {
            it.disable_recursion_pending();
            continue;
        }
        if (it->is_regular_file() && it->path().extension() == ".ipynb") {
            files.emplace_back(fs::relative(it->path(), root).generic_string(), it->path());
        }
    }
    std::sort(files.begin(), files.end());

    // Parse in parallel; results land in path order.
    std::vector<ParseOutcome> outcomes(files.size());
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), 8));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < files.size(); i += workers) {
                outcomes[i] = parse_file(files[i].second, files[i].first);
            }
        });
    }
    for (auto& t : pool) t.join();

    Corpus corpus;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (outcomes[i].notebook) {
            corpus.notebooks.push_back(std::move(*outcomes[i].notebook));
        } else {
            corpus.skipped.push_back({files[i].first, outcomes[i].error});
        }
    }
    corpus.stats = compute_stats(corpus.notebooks);
    return corpus;
}

}  // namespace edascope
