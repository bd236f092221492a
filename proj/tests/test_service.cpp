#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "edascope/notebook.hpp"
#include "edascope/service.hpp"
#include "httplib.h"
#include "workspace_helpers.hpp"

using namespace edascope;
using nlohmann::json;

namespace {

struct Fixture {
    std::filesystem::path dir;
    Workspace ws;
    std::shared_ptr<const Snapshot> snapshot;

    Fixture() : dir(testing::fresh_dir("edascope_service_test")), ws(dir / "work") {
        testing::run_pipeline(ws, testing::mixed_corpus(dir, EDASCOPE_FIXTURES), testing::quick_config());
        snapshot = load_snapshot(ws);
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// Runs must tile [0, cell_count) and agree with the member cells.
void check_dna(const json& dna, const EDASequence& seq) {
    const std::set<std::size_t> members(seq.member_cells.begin(), seq.member_cells.end());
    std::size_t next = 0;
    for (const auto& run : dna.at("runs")) {
        const auto start = run.at("start").get<std::size_t>();
        const auto end = run.at("end").get<std::size_t>();
        CHECK(start == next);
        CHECK(end > start);
        const bool in = run.at("in_sequence").get<bool>();
        if (run.at("folded").get<bool>()) {
            CHECK_FALSE(in);
            CHECK(end - start > 3);
        }
        for (std::size_t c = start; c < end; ++c) CHECK(members.count(c) == (in ? 1U : 0U));
        next = end;
    }
    CHECK(next == dna.at("cell_count").get<std::size_t>());
}

std::string first_notebook_id_with_sequences(const Snapshot& s, const std::string& path_suffix) {
    for (const auto& [id, nb] : s.notebooks) {
        if (nb.source_path.size() >= path_suffix.size() &&
            nb.source_path.compare(nb.source_path.size() - path_suffix.size(), path_suffix.size(), path_suffix) == 0) {
            return id;
        }
    }
    return {};
}

}  // namespace

TEST_CASE("DNA descriptor folding and tiling") {
    Notebook nb;
    nb.id = "n";
    for (std::size_t i = 0; i < 10; ++i) {
        Cell c;
        c.index = i;
        c.source = {"x" + std::to_string(i) + " = 1"};
        nb.cells.push_back(c);
    }
    EDASequence seq;
    seq.member_cells = {0, 2, 9};
    const auto dna = dna_descriptor(nb, seq, nullptr);
    const auto& runs = dna.at("runs");
    REQUIRE(runs.size() == 5);
    CHECK(runs[1].at("start") == 1);
    CHECK(runs[1].at("end") == 2);
    CHECK_FALSE(runs[1].at("folded").get<bool>());
    CHECK(runs[3].at("start") == 3);
    CHECK(runs[3].at("end") == 9);
    CHECK(runs[3].at("folded").get<bool>());
    CHECK(runs[3].at("preview") == "x3 = 1");
    check_dna(dna, seq);

    EDASequence exactly_three;
    exactly_three.member_cells = {0, 4};
    CHECK_FALSE(dna_descriptor(nb, exactly_three, nullptr).at("runs")[1].at("folded").get<bool>());
}

TEST_CASE("endpoints answer 503 before an index is loaded") {
    const Service svc;
    CHECK(svc.health().status == 503);
    CHECK(svc.search(R"J({"code":"x"})J").status == 503);
    CHECK(svc.recommend(R"J({"code":"x"})J").status == 503);
    CHECK(svc.sequence("a").status == 503);
    const auto r = svc.notebook("a", std::nullopt);
    CHECK(r.status == 503);
    CHECK(r.body.at("error").at("code") == 62);
    CHECK(r.body.at("schema") == "edascope/v1");
}

TEST_CASE("health reports the index size") {
    const Service svc(fixture().snapshot);
    const auto r = svc.health();
    CHECK(r.status == 200);
    CHECK(r.body.at("entries") == fixture().snapshot->index.size());
    CHECK(r.body.at("encoder_id") == fixture().snapshot->encoder.id());
}

TEST_CASE("search returns k ranked results with tiling DNA runs") {
    const auto& snap = *fixture().snapshot;
    REQUIRE(snap.index.size() >= 10);
    const Service svc(fixture().snapshot);
    const auto r = svc.search(json{{"code", "import pandas as pd\n# %%\ndf = pd.read_csv('x.csv')\n# %%\ndf.head()"}, {"k", 3}}.dump());
    REQUIRE(r.status == 200);
    const auto& results = r.body.at("results");
    REQUIRE(results.size() == 3);
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK(results[i].at("rank") == i + 1);
        if (i > 0) CHECK(results[i].at("score").get<double>() <= results[i - 1].at("score").get<double>());
        const auto id = results[i].at("sequence_id").get<std::string>();
        check_dna(results[i].at("dna"), snap.sequences.at(id));
    }
    const auto again = svc.search(json{{"code", "import pandas as pd\n# %%\ndf = pd.read_csv('x.csv')\n# %%\ndf.head()"}, {"k", 3}}.dump());
    CHECK(again.body == r.body);
}

TEST_CASE("every indexed sequence is its own best match through the service") {
    const auto& snap = *fixture().snapshot;
    const Service svc(fixture().snapshot);
    for (const auto& entry : snap.index.entries()) {
        const auto& seq = snap.sequences.at(entry.id);
        const auto r = svc.search(json{{"code", sequence_query_text(seq)}, {"k", snap.index.size()}}.dump());
        REQUIRE(r.status == 200);
        const auto& results = r.body.at("results");
        const auto own = std::find_if(results.begin(), results.end(), [&](const json& x) { return x.at("sequence_id") == entry.id; });
        REQUIRE(own != results.end());
        CHECK(own->at("score").get<double>() == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(own->at("score").get<double>() >= results[0].at("score").get<double>() - 1e-6);
        check_dna(own->at("dna"), seq);
    }
}

TEST_CASE("request errors map to status codes") {
    const Service svc(fixture().snapshot);
    CHECK(svc.search(R"J({"code":"y = 2","k":3})J").status == 400);
    CHECK(svc.search(R"J({"code":"y = 2","k":3})J").body.at("error").at("name") == "EmptyQuery");
    CHECK(svc.search("{not json").status == 400);
    CHECK(svc.search(R"J({"code":"import pandas as pd\npd.read_csv('a')","k":0})J").status == 400);
    CHECK(svc.search(R"J({"k":3})J").status == 400);
    CHECK(svc.recommend(R"J({"code":""})J").status == 400);
    CHECK(svc.sequence("nope").status == 404);
    CHECK(svc.notebook("nope", std::nullopt).status == 404);
}

TEST_CASE("sequence endpoint") {
    const auto& snap = *fixture().snapshot;
    const Service svc(fixture().snapshot);
    const auto& seq = snap.sequences.begin()->second;
    const auto r = svc.sequence(seq.id);
    REQUIRE(r.status == 200);
    CHECK(r.body.at("member_cells").get<std::vector<std::size_t>>() == seq.member_cells);
    CHECK(r.body.at("blocks").size() == seq.blocks.size());
    CHECK(r.body.at("notebook_id") == seq.notebook_id);
    check_dna(r.body.at("dna"), seq);
}

TEST_CASE("notebook endpoint flags exactly the sliced member cells") {
    const auto& snap = *fixture().snapshot;
    const Service svc(fixture().snapshot);
    // Independent slice of the fixture file.
    const auto raw = read_file(std::filesystem::path(EDASCOPE_FIXTURES) / "loan.ipynb");
    const auto nb = parse_notebook(raw, "loan.ipynb");
    const auto expected = slice_notebook(nb);
    REQUIRE(!expected.empty());
    const auto id = first_notebook_id_with_sequences(snap, "loan.ipynb");
    REQUIRE(!id.empty());
    for (const auto& seq : expected) {
        const auto sid = sequence_id(id, seq.sink_cell);
        const auto r = svc.notebook(id, sid);
        REQUIRE(r.status == 200);
        const std::set<std::size_t> members(seq.member_cells.begin(), seq.member_cells.end());
        const auto& cells = r.body.at("cells");
        REQUIRE(cells.size() == nb.cells.size());
        for (const auto& c : cells) CHECK(c.at("in_sequence").get<bool>() == (members.count(c.at("index").get<std::size_t>()) == 1));
    }
    const auto plain = svc.notebook(id, std::nullopt);
    REQUIRE(plain.status == 200);
    for (const auto& c : plain.body.at("cells")) CHECK_FALSE(c.at("in_sequence").get<bool>());
    CHECK(svc.notebook(id, "missing-c0").status == 404);
}

TEST_CASE("recommend returns bounded, ordered, documented suggestions") {
    const Service svc(fixture().snapshot);
    const auto r = svc.recommend(json{{"code", "import pandas as pd\ndf = pd.read_csv('a.csv')"}, {"limit", 5}}.dump());
    REQUIRE(r.status == 200);
    const auto& items = r.body.at("items");
    CHECK(items.size() <= 5);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const double p = items[i].at("probability");
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        if (i > 0) CHECK(p <= items[i - 1].at("probability").get<double>());
        CHECK(seen.insert(items[i].at("token").get<std::string>()).second);
        CHECK(items[i].contains("doc_url"));
    }

    auto without = std::make_shared<Snapshot>(*fixture().snapshot);
    without->recommender.reset();
    CHECK(Service(without).recommend(R"J({"code":"x"})J").status == 503);
}

TEST_CASE("snapshot swap is atomic for readers") {
    Service svc(fixture().snapshot);
    auto smaller = std::make_shared<Snapshot>(*fixture().snapshot);
    std::vector<IndexEntry> one = {smaller->index.entries().front()};
    smaller->index = SequenceIndex(smaller->index.encoder_id(), smaller->index.dim(), one);
    const auto before = svc.snapshot();
    svc.swap(smaller);
    CHECK(svc.health().body.at("entries") == 1);
    CHECK(before->index.size() == fixture().snapshot->index.size());
    svc.swap(nullptr);
    CHECK(svc.health().status == 503);
}

TEST_CASE("HTTP routes") {
    const Service svc(fixture().snapshot);
    httplib::Server server;
    svc.mount(server);
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    const auto health = client.Get("/healthz");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(json::parse(health->body).at("entries") == fixture().snapshot->index.size());

    const auto found = client.Post("/api/search", R"J({"code":"import pandas as pd\npd.read_csv('a').head()","k":3})J", "application/json");
    REQUIRE(found);
    CHECK(found->status == 200);
    CHECK(json::parse(found->body).at("results").size() == 3);

    const auto empty = client.Post("/api/search", R"J({"code":"z = 1","k":3})J", "application/json");
    REQUIRE(empty);
    CHECK(empty->status == 400);

    const auto rec = client.Post("/api/recommend", R"J({"code":"import pandas as pd\ndf = pd.read_csv('a')","limit":3})J", "application/json");
    REQUIRE(rec);
    CHECK(rec->status == 200);

    const auto& seq = fixture().snapshot->sequences.begin()->second;
    const auto got = client.Get("/api/sequence/" + seq.id);
    REQUIRE(got);
    CHECK(got->status == 200);
    const auto nb = client.Get("/api/notebook/" + seq.notebook_id + "?sequence=" + seq.id);
    REQUIRE(nb);
    CHECK(nb->status == 200);
    CHECK(client.Get("/api/sequence/unknown")->status == 404);
    CHECK(client.Get("/api/notebook/unknown")->status == 404);
    CHECK(client.Get("/no/such/route")->status == 404);

    server.stop();
    worker.join();
}
