#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "edascope/error.hpp"
#include "edascope/notebook.hpp"
#include "edascope/slicer.hpp"
#include "slice_oracle.hpp"

using namespace edascope;
namespace fs = std::filesystem;
using Cells = std::vector<std::size_t>;

namespace {

const fs::path kFixtures = EDASCOPE_FIXTURES;

Notebook load(const std::string& rel) {
    std::ifstream in(kFixtures / rel, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_notebook(buf.str(), rel);
}

Cells oracle_slice(const Notebook& nb, std::size_t sink) {
    const auto o = testing::oracle_slice(nb, sink);
    REQUIRE(o.has_value());
    CHECK(o->contained_in_all);
    return o->cells;
}

}  // namespace

TEST_CASE("sink detection: stored outputs plus a bare trailing expression") {
    const auto nb = load("sinks.ipynb");
    CHECK(detect_sinks(nb) == std::set<std::size_t>{2, 5, 7, 9});
}

TEST_CASE("ten-cell def/use chain excludes the unrelated cell") {
    const auto nb = load("defuse10.ipynb");
    CHECK(detect_sinks(nb) == std::set<std::size_t>{9});
    const auto seq = backward_slice(nb, 9);
    CHECK(seq.member_cells == Cells{0, 1, 2, 3, 4, 6, 7, 8, 9});
    CHECK(seq.member_cells == oracle_slice(nb, 9));
    CHECK(seq.sink_cell == 9);
    REQUIRE(seq.blocks.size() == seq.member_cells.size());
    for (std::size_t i = 0; i < seq.blocks.size(); ++i) {
        CHECK(seq.blocks[i].ordinal == i);
        CHECK(seq.blocks[i].origin_cell == seq.member_cells[i]);
        CHECK(seq.blocks[i].source == nb.cells[seq.member_cells[i]].source);
    }
}

TEST_CASE("slicer matches the brute-force oracle on every fixture sink") {
    for (const char* name : {"loan.ipynb", "sinks.ipynb", "defuse10.ipynb", "corpus3/a.ipynb", "corpus3/b.ipynb",
                             "corpus3/sub/c.ipynb"}) {
        const auto nb = load(name);
        for (const auto& c : nb.cells) {
            if (c.kind != CellKind::Code) continue;
            CAPTURE(name);
            CAPTURE(c.index);
            CHECK(backward_slice(nb, c.index).member_cells == oracle_slice(nb, c.index));
        }
    }
}

TEST_CASE("loan fixture sequences") {
    const auto nb = load("loan.ipynb");
    const auto seqs = slice_notebook(nb);
    REQUIRE(seqs.size() == 3);
    CHECK(seqs[0].member_cells == Cells{1, 2});
    CHECK(seqs[1].member_cells == Cells{1, 2, 4, 5});
    CHECK(seqs[2].member_cells == Cells{1, 2, 4, 6, 8, 9});
    CHECK(seqs[0].id == sequence_id(nb.id, 2));
    for (const auto& s : seqs) {
        CHECK(s.member_cells.back() == s.sink_cell);
        for (auto c : s.member_cells) CHECK(nb.cells[c].kind == CellKind::Code);
    }
}

TEST_CASE("corpus fixture yields six sequences") {
    const Corpus corpus = scan_corpus(kFixtures / "corpus3");
    std::vector<Cells> all;
    for (const auto& nb : corpus.notebooks) {
        for (const auto& s : slice_notebook(nb)) all.push_back(s.member_cells);
    }
    const std::vector<Cells> expected = {{0, 1, 2}, {0, 1, 3, 4}, {0, 1, 2, 4}, {1, 3, 4, 5}, {0, 6}, {1, 3, 4, 7, 8}};
    CHECK(all == expected);
}

TEST_CASE("slicing a markdown or out-of-range cell is an InvalidArgument") {
    const auto nb = load("loan.ipynb");
    for (std::size_t bad : {std::size_t{0}, std::size_t{3}, std::size_t{42}}) {
        try {
            backward_slice(nb, bad);
            FAIL("expected InvalidArgument");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidArgument);
        }
    }
}

TEST_CASE("undefined non-builtin names are recorded as external") {
    Notebook nb;
    nb.id = "ext";
    nb.cells.push_back(Cell{0, CellKind::Code, {"x = mystery + 1"}, false});
    nb.cells.push_back(Cell{1, CellKind::Code, {"print(x, len(x))"}, false});
    const auto seq = backward_slice(nb, 1);
    CHECK(seq.member_cells == Cells{0, 1});
    CHECK(seq.external_names == std::set<std::string>{"mystery"});
}

TEST_CASE("redefinition cuts the chain at the nearest definer") {
    Notebook nb;
    nb.id = "redef";
    const char* src[] = {"a = load()", "a = 5", "b = a * 2", "print(b)"};
    for (std::size_t i = 0; i < 4; ++i) nb.cells.push_back(Cell{i, CellKind::Code, {src[i]}, false});
    CHECK(backward_slice(nb, 3).member_cells == Cells{1, 2, 3});
}

TEST_CASE("a cell that fails to parse contributes nothing but is still sliceable") {
    Notebook nb;
    nb.id = "broken";
    nb.cells.push_back(Cell{0, CellKind::Code, {"x = 1"}, false});
    nb.cells.push_back(Cell{1, CellKind::Code, {"y = (x"}, true});
    const auto seq = backward_slice(nb, 1);
    CHECK(seq.member_cells == Cells{1});
}

TEST_CASE("duplicate member sets collapse; empty sinks are skipped") {
    Notebook nb;
    nb.id = "dup";
    nb.cells.push_back(Cell{0, CellKind::Code, {"x = 1"}, false});
    nb.cells.push_back(Cell{1, CellKind::Code, {}, true});
    nb.cells.push_back(Cell{2, CellKind::Code, {"print(x)"}, true});
    nb.cells.push_back(Cell{3, CellKind::Code, {"print(x)"}, true});
    const auto seqs = slice_notebook(nb);
    REQUIRE(seqs.size() == 2);
    CHECK(seqs[0].member_cells == Cells{0, 2});
    CHECK(seqs[1].member_cells == Cells{0, 3});
}

TEST_CASE("custom output API list") {
    Notebook nb;
    nb.id = "apis";
    nb.cells.push_back(Cell{0, CellKind::Code, {"import logging", "log = logging.getLogger()"}, false});
    nb.cells.push_back(Cell{1, CellKind::Code, {"_ = log.info('x')"}, false});
    CHECK(detect_sinks(nb).empty());
    SliceOptions opts;
    opts.output_apis = {"*.info"};
    CHECK(detect_sinks(nb, opts) == std::set<std::size_t>{1});
}
