#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "edascope/types.hpp"

namespace edascope {

// Token-level corpus drawn from known topic distributions. Topic k puts
// Zipf-weighted mass on its own contiguous slice of the vocabulary.
struct PlantedTopics {
    std::size_t K = 0;
    std::size_t V = 0;
    std::vector<std::vector<double>> phi;  // K x V
    std::vector<std::vector<TokenId>> docs;

    std::vector<TokenId> top_tokens(std::size_t topic, std::size_t n) const;
};

struct PlantedTopicSpec {
    std::size_t documents = 400;
    std::size_t vocabulary = 200;
    std::size_t topics = 4;
    std::size_t min_length = 40;
    std::size_t max_length = 80;
    double doc_concentration = 0.1;  // symmetric Dirichlet over topics
    std::uint64_t seed = 7;
};

PlantedTopics plant_topic_corpus(const PlantedTopicSpec& spec);

// Notebook corpus with planted EDA structure: each notebook holds 1..3
// independent analysis branches built from typed block templates, chained
// by Markov transitions that favor one successor per template.
struct SyntheticSpec {
    std::size_t notebooks = 40;
    std::size_t min_branches = 1;
    std::size_t max_branches = 3;
    double preferred_successor = 0.75;
    double noise_cell_rate = 0.15;
    double markdown_rate = 0.2;
    std::uint64_t seed = 7;
};

struct SyntheticNotebook {
    std::string relative_path;
    nlohmann::json document() const;
    std::vector<std::string> cells;      // sources
    std::vector<bool> markdown;          // per cell
    std::vector<bool> stored_output;     // per cell
    std::vector<std::vector<std::size_t>> branch_cells;  // per branch, ascending
};

std::vector<SyntheticNotebook> generate_notebooks(const SyntheticSpec& spec);

// Writes the generated notebooks under root (created if needed). Output is
// byte-identical for a fixed spec.
void write_synthetic_corpus(const std::filesystem::path& root, const SyntheticSpec& spec);

}  // namespace edascope
