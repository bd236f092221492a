#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "edascope/python_ast.hpp"
#include "edascope/slicer.hpp"

namespace edascope::detail {

struct CellSyntax {
    DefUse def_use;
    bool trailing_expression = false;
    std::vector<const python::Expr*> callees;  // valid while `module` lives
    python::Module module;
};

// Parses a (magic-stripped) cell once and derives the slicer's facts.
CellSyntax analyze_cell(std::string_view cell_source);

// Module-scope def/use of an already-parsed module.
DefUse module_def_use(const python::Module& module);

bool callee_matches(const python::Expr& callee, std::string_view pattern);

}  // namespace edascope::detail
