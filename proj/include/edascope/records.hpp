#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edascope/analyzer.hpp"
#include "edascope/notebook.hpp"
#include "edascope/slicer.hpp"

// JSONL records exchanged between pipeline stages. Every line carries a
// "type" field.
namespace edascope::records {

nlohmann::json notebook_to_json(const Notebook& nb);
Notebook notebook_from_json(const nlohmann::json& j);

nlohmann::json stats_to_json(const CorpusStats& stats);

nlohmann::json sequence_to_json(const EDASequence& seq);
EDASequence sequence_from_json(const nlohmann::json& j);

nlohmann::json analysis_to_json(const SequenceAnalysis& a);
SequenceAnalysis analysis_from_json(const nlohmann::json& j);

// Writes one compact JSON document per line.
void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& lines);
// Calls visit for every non-empty line. Throws IoError / FormatError.
void read_jsonl(const std::filesystem::path& path, const std::function<void(const nlohmann::json&)>& visit);

// Typed readers skip records of other types.
std::vector<Notebook> read_notebooks(const std::filesystem::path& path);
std::vector<EDASequence> read_sequences(const std::filesystem::path& path);
std::vector<SequenceAnalysis> read_analyses(const std::filesystem::path& path);

}  // namespace edascope::records
