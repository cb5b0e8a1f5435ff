#pragma once

#include "stlgp/formula.hpp"

#include <string_view>

namespace stlgp {

/// Parses STL text into a formula tree.
///
///   formula := "true" | "false" | atom | "not" formula
///            | formula ("and" | "or" | "->") formula
///            | ("G" | "F") "[" num "," num "]" formula
///            | formula "U" "[" num "," num "]" formula
///            | "(" formula ")"
///   atom    := expr cmp expr { cmp expr }      (chains become conjunctions)
///   expr    := arithmetic over numbers and variables with + - * / and parentheses
///
/// Binding strength, tightest first: "not" and the unary temporal operators,
/// "U", "and", "or", then "->" (right associative).
///
/// Throws ParseError carrying the line and column of the offending token.
FormulaPtr parse(std::string_view text);

} // namespace stlgp
