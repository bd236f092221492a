#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "edascope/notebook.hpp"
#include "edascope/slicer.hpp"
#include "edascope/synthetic.hpp"

namespace edascope::testing {

inline std::vector<Notebook> synthetic_notebooks(const SyntheticSpec& spec) {
    std::vector<Notebook> out;
    for (const auto& nb : generate_notebooks(spec)) out.push_back(parse_notebook(nb.document().dump(), nb.relative_path));
    return out;
}

inline std::vector<EDASequence> slice_all(const std::vector<Notebook>& notebooks) {
    std::vector<EDASequence> out;
    for (const auto& nb : notebooks) {
        for (auto& s : slice_notebook(nb)) out.push_back(std::move(s));
    }
    return out;
}

}  // namespace edascope::testing
