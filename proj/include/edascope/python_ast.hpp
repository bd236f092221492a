#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

// Syntax tree for the Python subset understood by the slicer and the
// analyzer. Only what name-binding and call extraction need is kept:
// operators collapse into a generic Operation node, literals into Constant.
namespace edascope::python {

enum class ExprKind {
    Name,
    Attribute,      // operands[0] . id
    Call,           // operands[0] is the callee, the rest are argument values
    Subscript,      // operands[0] [ operands[1..] ]
    Constant,
    Tuple,
    List,
    Set,
    Dict,           // keys and values flattened; `**m` entries are Starred
    Operation,      // unary/binary/boolean/comparison/conditional
    Starred,
    Lambda,
    Comprehension,  // operands are the element expression(s)
    NamedExpr,      // operands[0] is the Name target, operands[1] the value
    Yield,
    FString,        // operands are the embedded replacement-field expressions
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Parameter {
    std::string name;
    ExprPtr default_value;
    ExprPtr annotation;
};

struct Generator {
    ExprPtr target;
    ExprPtr iter;
    std::vector<ExprPtr> conditions;
};

struct Expr {
    ExprKind kind = ExprKind::Constant;
    std::size_t offset = 0;  // byte offset; for Call, the opening parenthesis
    std::string id;          // Name identifier or Attribute member
    std::vector<ExprPtr> operands;
    std::vector<Parameter> params;       // Lambda
    std::vector<Generator> generators;   // Comprehension
};

enum class StmtKind {
    Expr,
    Assign,
    AugAssign,
    AnnAssign,
    Import,
    ImportFrom,
    FunctionDef,
    ClassDef,
    For,
    While,
    If,
    With,
    Try,
    Return,
    Delete,
    Global,
    Nonlocal,
    Pass,
    Break,
    Continue,
    Raise,
    Assert,
    Opaque,
};

struct ImportName {
    std::string name;    // dotted module path or imported member
    std::string asname;  // empty when not aliased
};

struct Stmt;

struct ExceptHandler {
    ExprPtr type;
    std::string name;
    std::vector<Stmt> body;
};

struct WithItem {
    ExprPtr context;
    ExprPtr target;
};

struct Stmt {
    StmtKind kind = StmtKind::Pass;
    std::size_t line = 0;
    bool semicolon_terminated = false;

    // Assign: all targets of a chained assignment. For/AugAssign/AnnAssign:
    // targets[0]. Delete: the deleted expressions.
    std::vector<ExprPtr> targets;
    // Assign/AugAssign/AnnAssign value; Expr; Return; For iter; While/If test;
    // Raise exception; Assert test.
    ExprPtr value;
    // AnnAssign annotation, Raise cause, Assert message, FunctionDef return
    // annotation.
    std::vector<ExprPtr> extra;
    std::vector<ExprPtr> decorators;
    std::vector<ExprPtr> bases;  // ClassDef argument values

    std::string name;  // FunctionDef/ClassDef name, ImportFrom module
    int level = 0;     // ImportFrom leading dots
    std::vector<ImportName> names;  // Import/ImportFrom/Global/Nonlocal
    std::vector<Parameter> params;

    std::vector<Stmt> body;
    std::vector<Stmt> orelse;
    std::vector<Stmt> finalbody;
    std::vector<ExceptHandler> handlers;
    std::vector<WithItem> items;

    // Opaque: every free-standing identifier in the unparsed statement.
    std::vector<std::string> opaque_names;
};

struct Module {
    std::vector<Stmt> body;
    std::size_t opaque_statements = 0;
};

// Visits every expression reachable from the module, including those nested
// in function and class bodies, in document order of the statements.
void for_each_expr(const Module& module, const std::function<void(const Expr&)>& visit);
void for_each_expr(const Expr& expr, const std::function<void(const Expr&)>& visit);

}  // namespace edascope::python
