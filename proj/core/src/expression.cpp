#include "sfn/expression.hpp"

#include <cmath>
#include <cstdio>

namespace sfn {
namespace {

std::string format_number(double value, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, value);
  std::string s = buf;
  if (s == "-0") s = "0";
  return s;
}

std::string render_term(const ElementaryNode& node, int precision, double scale);

std::string render_argument(const ElementaryNode& node, int precision) {
  std::string var = "x" + std::to_string(node.base_input + 1);
  if (node.children.empty()) return var;
  std::string s = "(" + var;
  for (const ElementaryNode& child : node.children) {
    const double scale = child.params[0];
    s += std::signbit(scale) ? " - " : " + ";
    s += render_term(child, precision, std::fabs(scale));
  }
  return s + ")";
}

// `scale` replaces params[0], letting callers fold its sign into an operator.
std::string render_term(const ElementaryNode& node, int precision, double scale) {
  const std::string coef = format_number(scale, precision);
  const std::string arg = render_argument(node, precision);
  switch (node.kind) {
    case ElementaryKind::E1: {
      std::string e = format_number(node.params[1], precision);
      if (e.front() == '-') e = "(" + e + ")";
      return coef + "*(" + arg + "^2 + 1)^" + e;
    }
    case ElementaryKind::E2:
      return coef + "*exp(" + format_number(node.params[1], precision) + "*" + arg + ")";
    case ElementaryKind::E3:
      return coef + "*log(" + arg + "^2 + 1)";
  }
  return {};
}

}  // namespace

std::string export_expression(const SymbolicNetwork& net, int precision) {
  if (net.roots.empty()) return "0";
  std::string s;
  for (std::size_t r = 0; r < net.roots.size(); ++r) {
    const ElementaryNode& root = net.roots[r];
    if (r == 0) {
      s += render_term(root, precision, root.params[0]);
      continue;
    }
    s += std::signbit(root.params[0]) ? " - " : " + ";
    s += render_term(root, precision, std::fabs(root.params[0]));
  }
  return s;
}

}  // namespace sfn
