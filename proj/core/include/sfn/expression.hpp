#pragma once

#include <string>

#include "sfn/network.hpp"

namespace sfn {

/// Renders a network as a fully expanded closed-form expression.
///
/// Grammar (numbers printed with `precision` significant digits, %g style):
///
///   network := "0" | term { (" + " | " - ") term }
///   term    := coef "*(" arg "^2 + 1)^" exp      E1, exp wrapped as "(-v)" when negative
///            | coef "*exp(" coef "*" arg ")"     E2
///            | coef "*log(" arg "^2 + 1)"        E3
///   arg     := "x" k                             node without children (k is 1-based)
///            | "(x" k { (" + " | " - ") term } ")"
///
/// A negative leading coefficient of a non-first term is folded into the
/// joining operator ("x1 - 0.31*log(...)"). The first term of the network
/// keeps its sign ("-0.307*exp(...)").
std::string export_expression(const SymbolicNetwork& net, int precision = 6);

}  // namespace sfn
