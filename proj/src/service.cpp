#include "edascope/service.hpp"

#include <algorithm>
#include <set>

#include "httplib.h"

namespace edascope {

using nlohmann::json;

namespace {

std::string preview(const Cell& cell) {
    for (const auto& line : cell.source) {
        const auto start = line.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        auto text = line.substr(start);
        if (text.size() > 80) text = text.substr(0, 77) + "...";
        return text;
    }
    return {};
}

json type_or_null(std::optional<EdaType> t) {
    return t ? json(eda_type_name(*t)) : json(nullptr);
}

std::optional<EdaType> block_type(const SequenceAnalysis* a, std::size_t block) {
    if (!a || block >= a->block_types.size()) return std::nullopt;
    return a->block_types[block];
}

json keywords_json(const std::vector<std::pair<std::string, double>>& keywords) {
    json out = json::array();
    for (const auto& [t, s] : keywords) out.push_back({{"token", t}, {"score", s}});
    return out;
}

json runs_json(const std::vector<TypeRun>& runs) {
    json out = json::array();
    for (const auto& r : runs) out.push_back({{"eda_type", eda_type_name(r.type)}, {"length", r.length}});
    return out;
}

ServiceResponse fail(ErrorCode code, std::string_view message) {
    return {http_status(code), error_body(code, message)};
}

json parse_body(std::string_view body) {
    try {
        auto j = json::parse(body);
        if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("malformed JSON body: ") + e.what());
    }
}

std::size_t positive_field(const json& j, const char* key, std::size_t fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
        throw Error(ErrorCode::InvalidArgument, std::string(key) + " must be a positive integer");
    }
    return v.get<std::size_t>();
}

std::string code_field(const json& j) {
    if (!j.contains("code") || !j.at("code").is_string()) throw Error(ErrorCode::InvalidArgument, "code must be a string");
    return j.at("code").get<std::string>();
}

template <typename F>
ServiceResponse guarded(const std::shared_ptr<const Snapshot>& snap, F&& f) {
    if (!snap) return fail(ErrorCode::IndexNotLoaded, "no index loaded");
    try {
        return f(*snap);
    } catch (const Error& e) {
        return fail(e.code(), e.what());
    }
}

}  // namespace

json dna_descriptor(const Notebook& notebook, const EDASequence& sequence, const SequenceAnalysis* analysis) {
    const std::set<std::size_t> members(sequence.member_cells.begin(), sequence.member_cells.end());
    json runs = json::array();
    const auto n = notebook.cells.size();
    std::size_t i = 0;
    while (i < n) {
        if (members.count(i)) {
            const auto block = static_cast<std::size_t>(
                std::find(sequence.member_cells.begin(), sequence.member_cells.end(), i) - sequence.member_cells.begin());
            runs.push_back({{"in_sequence", true},
                            {"eda_type", type_or_null(block_type(analysis, block).value_or(EdaType::Unknown))},
                            {"start", i},
                            {"end", i + 1},
                            {"folded", false},
                            {"preview", preview(notebook.cells[i])}});
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && !members.count(j)) ++j;
        runs.push_back({{"in_sequence", false},
                        {"eda_type", nullptr},
                        {"start", i},
                        {"end", j},
                        {"folded", j - i > kFoldThreshold},
                        {"preview", preview(notebook.cells[i])}});
        i = j;
    }
    return {{"cell_count", n}, {"runs", runs}};
}

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyQuery:
        case ErrorCode::InvalidArgument:
        case ErrorCode::ParseFailure:
            return 400;
        case ErrorCode::NotFound:
        case ErrorCode::UnknownSequence:
            return 404;
        case ErrorCode::IndexNotLoaded:
            return 503;
        default:
            return 500;
    }
}

json error_body(ErrorCode code, std::string_view message) {
    return {{"schema", kSchema},
            {"error", {{"code", static_cast<int>(code)}, {"name", error_code_name(code)}, {"message", message}}}};
}

Service::Service(std::shared_ptr<const Snapshot> snapshot, DocUrlTemplates templates)
    : snapshot_(std::move(snapshot)), templates_(std::move(templates)) {}

void Service::swap(std::shared_ptr<const Snapshot> snapshot) {
    std::lock_guard lock(mutex_);
    snapshot_ = std::move(snapshot);
}

std::shared_ptr<const Snapshot> Service::snapshot() const {
    std::lock_guard lock(mutex_);
    return snapshot_;
}

ServiceResponse Service::health() const {
    return guarded(snapshot(), [](const Snapshot& s) -> ServiceResponse {
        return {200,
                {{"schema", kSchema},
                 {"status", "ok"},
                 {"entries", s.index.size()},
                 {"encoder_id", s.index.encoder_id()},
                 {"recommender", s.recommender ? json(s.recommender->id) : json(nullptr)}}};
    });
}

ServiceResponse Service::search(std::string_view request_body) const {
    return guarded(snapshot(), [&](const Snapshot& s) -> ServiceResponse {
        const auto req = parse_body(request_body);
        const auto code = code_field(req);
        const auto k = positive_field(req, "k", 10);
        const auto result = edascope::search(code, k, s.index, s.encoder, s.vocabulary, s.extract);
        json results = json::array();
        for (std::size_t r = 0; r < result.hits.size(); ++r) {
            const auto& hit = result.hits[r];
            const auto* entry = s.index.find(hit.id);
            json item = {{"rank", r + 1},
                         {"sequence_id", hit.id},
                         {"score", hit.score},
                         {"notebook_id", entry->notebook_id},
                         {"keywords", keywords_json(entry->keywords)},
                         {"type_runs", runs_json(entry->type_runs)}};
            const auto seq = s.sequences.find(hit.id);
            const auto nb = s.notebooks.find(entry->notebook_id);
            if (seq != s.sequences.end() && nb != s.notebooks.end()) {
                const auto a = s.analyses.find(hit.id);
                item["notebook_path"] = nb->second.source_path;
                item["dna"] = dna_descriptor(nb->second, seq->second, a == s.analyses.end() ? nullptr : &a->second);
            }
            results.push_back(std::move(item));
        }
        return {200, {{"schema", kSchema}, {"query", code}, {"k", k}, {"encoder_id", s.encoder.id()}, {"results", results}}};
    });
}

ServiceResponse Service::recommend(std::string_view request_body) const {
    return guarded(snapshot(), [&](const Snapshot& s) -> ServiceResponse {
        if (!s.recommender) return fail(ErrorCode::IndexNotLoaded, "no recommender loaded");
        const auto req = parse_body(request_body);
        const auto code = code_field(req);
        const auto limit = positive_field(req, "limit", 10);
        const auto rec = edascope::recommend(code, *s.recommender, s.encoder, s.index, s.vocabulary, limit, s.extract);
        json items = json::array();
        for (const auto& [t, p] : rec.items) {
            const auto& name = s.vocabulary.canonical(t);
            items.push_back({{"token", name}, {"probability", p}, {"doc_url", documentation_url(name, templates_)}});
        }
        return {200,
                {{"schema", kSchema},
                 {"model_id", rec.model_id},
                 {"threshold", s.recommender->threshold},
                 {"limit", limit},
                 {"items", items}}};
    });
}

ServiceResponse Service::sequence(std::string_view id) const {
    return guarded(snapshot(), [&](const Snapshot& s) -> ServiceResponse {
        const auto it = s.sequences.find(std::string(id));
        if (it == s.sequences.end()) return fail(ErrorCode::NotFound, "unknown sequence " + std::string(id));
        const auto& seq = it->second;
        const auto a = s.analyses.find(seq.id);
        const SequenceAnalysis* analysis = a == s.analyses.end() ? nullptr : &a->second;
        json blocks = json::array();
        for (std::size_t b = 0; b < seq.blocks.size(); ++b) {
            json tokens = json::array();
            if (analysis && b < analysis->block_tokens.size()) {
                for (auto t : analysis->block_tokens[b]) tokens.push_back(s.vocabulary.canonical(t));
            }
            blocks.push_back({{"ordinal", seq.blocks[b].ordinal},
                              {"origin_cell", seq.blocks[b].origin_cell},
                              {"source", seq.blocks[b].text()},
                              {"eda_type", type_or_null(block_type(analysis, b).value_or(EdaType::Unknown))},
                              {"api_tokens", tokens}});
        }
        json body = {{"schema", kSchema},
                     {"sequence_id", seq.id},
                     {"notebook_id", seq.notebook_id},
                     {"sink_cell", seq.sink_cell},
                     {"member_cells", seq.member_cells},
                     {"indexed", s.index.find(seq.id) != nullptr},
                     {"blocks", blocks},
                     {"keywords", keywords_json(analysis ? analysis->keywords : std::vector<std::pair<std::string, double>>{})}};
        if (const auto nb = s.notebooks.find(seq.notebook_id); nb != s.notebooks.end()) {
            body["dna"] = dna_descriptor(nb->second, seq, analysis);
        }
        return {200, body};
    });
}

ServiceResponse Service::notebook(std::string_view id, std::optional<std::string> sequence_id) const {
    return guarded(snapshot(), [&](const Snapshot& s) -> ServiceResponse {
        const auto it = s.notebooks.find(std::string(id));
        if (it == s.notebooks.end()) return fail(ErrorCode::NotFound, "unknown notebook " + std::string(id));
        const auto& nb = it->second;
        std::set<std::size_t> members;
        const SequenceAnalysis* analysis = nullptr;
        const EDASequence* seq = nullptr;
        if (sequence_id) {
            const auto sit = s.sequences.find(*sequence_id);
            if (sit == s.sequences.end() || sit->second.notebook_id != nb.id) {
                return fail(ErrorCode::NotFound, "sequence " + *sequence_id + " does not belong to notebook " + nb.id);
            }
            seq = &sit->second;
            members.insert(seq->member_cells.begin(), seq->member_cells.end());
            if (const auto a = s.analyses.find(*sequence_id); a != s.analyses.end()) analysis = &a->second;
        }
        json cells = json::array();
        for (const auto& c : nb.cells) {
            json cell = {{"index", c.index},
                         {"kind", c.kind == CellKind::Code ? "code" : "markdown"},
                         {"source", c.text()},
                         {"in_sequence", members.count(c.index) > 0}};
            if (seq && members.count(c.index)) {
                const auto b = static_cast<std::size_t>(
                    std::find(seq->member_cells.begin(), seq->member_cells.end(), c.index) - seq->member_cells.begin());
                cell["eda_type"] = type_or_null(block_type(analysis, b).value_or(EdaType::Unknown));
            }
            cells.push_back(std::move(cell));
        }
        json body = {{"schema", kSchema},
                     {"notebook_id", nb.id},
                     {"path", nb.source_path},
                     {"sequence_id", sequence_id ? json(*sequence_id) : json(nullptr)},
                     {"cells", cells}};
        if (seq) body["dna"] = dna_descriptor(nb, *seq, analysis);
        return {200, body};
    });
}

void Service::mount(httplib::Server& server) const {
    const auto reply = [](httplib::Response& res, const ServiceResponse& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    server.Get("/healthz", [this, reply](const httplib::Request&, httplib::Response& res) { reply(res, health()); });
    server.Post("/api/search", [this, reply](const httplib::Request& req, httplib::Response& res) { reply(res, search(req.body)); });
    server.Post("/api/recommend",
                [this, reply](const httplib::Request& req, httplib::Response& res) { reply(res, recommend(req.body)); });
    server.Get(R"(/api/sequence/([^/]+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
        reply(res, sequence(req.matches[1].str()));
    });
    server.Get(R"(/api/notebook/([^/]+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
        std::optional<std::string> seq;
        if (req.has_param("sequence")) seq = req.get_param_value("sequence");
        reply(res, notebook(req.matches[1].str(), seq));
    });
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) {
            res.set_content(error_body(ErrorCode::NotFound, "no such route").dump(), "application/json");
        }
    });
}

}  // namespace edascope
