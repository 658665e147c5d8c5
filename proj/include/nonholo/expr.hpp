#pragma once

#include <map>
#include <string>

#include "nonholo/field.hpp"

namespace nonholo {

// Small arithmetic language for scenario fields:
//   + - * / ^, unary minus, parentheses, numbers,
//   sin cos exp log sqrt abs, coordinates u1..u<arity>,
//   named constants (pi, e, and any supplied in `constants`).
// Errors are ParseFailure with the column inside `source`; `line` and
// `column_offset` let callers report positions in an enclosing file.
ScalarField parse_expression(const std::string& source, int arity,
                             const std::map<std::string, double>& constants = {}, int line = 1,
                             int column_offset = 0);

}  // namespace nonholo
