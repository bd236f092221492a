#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "edascope/error.hpp"
#include "edascope/recommender.hpp"
#include "edascope/workspace.hpp"

namespace httplib {
class Server;
}

namespace edascope {

inline constexpr std::string_view kSchema = "edascope/v1";

// Cells not in the sequence longer than this are folded.
inline constexpr std::size_t kFoldThreshold = 3;

// Ordered runs covering [0, cell_count) exactly once. Member cells form
// one run each; consecutive non-member cells form one run.
nlohmann::json dna_descriptor(const Notebook& notebook, const EDASequence& sequence, const SequenceAnalysis* analysis);

int http_status(ErrorCode code);
nlohmann::json error_body(ErrorCode code, std::string_view message);

struct ServiceResponse {
    int status = 200;
    nlohmann::json body;
};

class Service {
public:
    explicit Service(std::shared_ptr<const Snapshot> snapshot = nullptr, DocUrlTemplates templates = default_doc_url_templates());

    // Replaces the served snapshot; requests in flight keep the old one.
    void swap(std::shared_ptr<const Snapshot> snapshot);
    std::shared_ptr<const Snapshot> snapshot() const;

    ServiceResponse health() const;
    ServiceResponse search(std::string_view request_body) const;
    ServiceResponse recommend(std::string_view request_body) const;
    ServiceResponse sequence(std::string_view id) const;
    ServiceResponse notebook(std::string_view id, std::optional<std::string> sequence_id) const;

    // Registers the HTTP routes on server. The service must outlive it.
    void mount(httplib::Server& server) const;

private:
    mutable std::mutex mutex_;
    std::shared_ptr<const Snapshot> snapshot_;
    DocUrlTemplates templates_;
};

}  // namespace edascope
