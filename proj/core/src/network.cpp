#include "sfn/network.hpp"

#include <algorithm>
#include <cmath>

#include "sfn/error.hpp"

namespace sfn {
namespace {

struct KindValue {
  double out;
  double dout_du;
  double dparam[2];
};

// Shared by the tree and flat evaluators so both produce identical bits.
inline double apply_kind(ElementaryKind kind, const double* p, double u, bool& clamped) {
  switch (kind) {
    case ElementaryKind::E1:
      return p[0] * std::exp(p[1] * std::log1p(u * u));
    case ElementaryKind::E2: {
      double a = p[1] * u;
      if (a > kExponentClamp || a < -kExponentClamp) {
        clamped = true;
        a = std::clamp(a, -kExponentClamp, kExponentClamp);
      }
      return p[0] * std::exp(a);
    }
    case ElementaryKind::E3:
      return p[0] * std::log1p(u * u);
  }
  return 0.0;
}

inline KindValue apply_kind_grad(ElementaryKind kind, const double* p, double u, bool& clamped) {
  KindValue r{};
  switch (kind) {
    case ElementaryKind::E1: {
      const double log_s = std::log1p(u * u);
      const double pw = std::exp(p[1] * log_s);
      r.out = p[0] * pw;
      r.dout_du = p[0] * p[1] * pw * (2.0 * u / (1.0 + u * u));
      r.dparam[0] = pw;
      r.dparam[1] = p[0] * pw * log_s;
      break;
    }
    case ElementaryKind::E2: {
      double a = p[1] * u;
      bool hit = false;
      if (a > kExponentClamp || a < -kExponentClamp) {
        hit = true;
        clamped = true;
        a = std::clamp(a, -kExponentClamp, kExponentClamp);
      }
      const double ex = std::exp(a);
      r.out = p[0] * ex;
      r.dout_du = hit ? 0.0 : p[0] * p[1] * ex;
      r.dparam[0] = ex;
      r.dparam[1] = hit ? 0.0 : p[0] * u * ex;
      break;
    }
    case ElementaryKind::E3: {
      const double log_s = std::log1p(u * u);
      r.out = p[0] * log_s;
      r.dout_du = p[0] * (2.0 * u / (1.0 + u * u));
      r.dparam[0] = log_s;
      break;
    }
  }
  return r;
}

double evaluate_rec(const ElementaryNode& node, std::span<const double> x, NodePath& path) {
  double u = x[node.base_input];
  for (std::size_t c = 0; c < node.children.size(); ++c) {
    path.push_back(c);
    u += evaluate_rec(node.children[c], x, path);
    path.pop_back();
  }
  bool clamped = false;
  const double out = apply_kind(node.kind, node.params.data(), u, clamped);
  if (!std::isfinite(out)) {
    throw EvaluationError("non-finite " + std::string(to_string(node.kind)) + " output at node " +
                              to_string(path),
                          path);
  }
  return out;
}

void validate_node(const ElementaryNode& node, std::size_t input_dim, NodePath& path) {
  if (node.params.size() != parameter_count(node.kind)) {
    throw ModelError("node " + to_string(path) + ": " + std::string(to_string(node.kind)) +
                     " expects " + std::to_string(parameter_count(node.kind)) + " params, got " +
                     std::to_string(node.params.size()));
  }
  if (node.base_input >= input_dim) {
    throw ModelError("node " + to_string(path) + ": base_input " +
                     std::to_string(node.base_input) + " >= input_dim " +
                     std::to_string(input_dim));
  }
  for (double p : node.params) {
    if (!std::isfinite(p)) throw ModelError("node " + to_string(path) + ": non-finite parameter");
  }
  for (std::size_t c = 0; c < node.children.size(); ++c) {
    path.push_back(c);
    validate_node(node.children[c], input_dim, path);
    path.pop_back();
  }
}

template <typename Node, typename Fn>
void for_each_preorder(Node& node, NodePath& path, Fn&& fn) {
  fn(node, path);
  for (std::size_t c = 0; c < node.children.size(); ++c) {
    path.push_back(c);
    for_each_preorder(node.children[c], path, fn);
    path.pop_back();
  }
}

template <typename Net, typename Fn>
void for_each_node(Net& net, Fn&& fn) {
  NodePath path;
  for (std::size_t r = 0; r < net.roots.size(); ++r) {
    path.assign(1, r);
    for_each_preorder(net.roots[r], path, fn);
  }
}

}  // namespace

std::string_view to_string(ElementaryKind kind) noexcept {
  switch (kind) {
    case ElementaryKind::E1:
      return "E1";
    case ElementaryKind::E2:
      return "E2";
    case ElementaryKind::E3:
      return "E3";
  }
  return "?";
}

std::optional<ElementaryKind> parse_kind(std::string_view text) noexcept {
  if (text == "E1") return ElementaryKind::E1;
  if (text == "E2") return ElementaryKind::E2;
  if (text == "E3") return ElementaryKind::E3;
  return std::nullopt;
}

ElementaryNode make_node(ElementaryKind kind, std::vector<double> params, std::size_t base_input,
                         std::vector<ElementaryNode> children) {
  if (params.size() != parameter_count(kind)) {
    throw ModelError(std::string(to_string(kind)) + " expects " +
                     std::to_string(parameter_count(kind)) + " params, got " +
                     std::to_string(params.size()));
  }
  return ElementaryNode{kind, std::move(params), base_input, std::move(children)};
}

std::string to_string(const NodePath& path) {
  if (path.empty()) return "root";
  std::string s = "r" + std::to_string(path[0]);
  for (std::size_t i = 1; i < path.size(); ++i) s += "." + std::to_string(path[i]);
  return s;
}

void validate(const SymbolicNetwork& net) {
  if (net.input_dim == 0) throw ModelError("input_dim must be positive");
  NodePath path;
  for (std::size_t r = 0; r < net.roots.size(); ++r) {
    path.assign(1, r);
    validate_node(net.roots[r], net.input_dim, path);
  }
}

double evaluate(const ElementaryNode& node, std::span<const double> x) {
  NodePath path;
  return evaluate_rec(node, x, path);
}

double evaluate(const SymbolicNetwork& net, std::span<const double> x) {
  if (x.size() != net.input_dim) {
    throw DataError("input has " + std::to_string(x.size()) + " values, network expects " +
                    std::to_string(net.input_dim));
  }
  double total = 0.0;
  NodePath path;
  for (std::size_t r = 0; r < net.roots.size(); ++r) {
    path.assign(1, r);
    total += evaluate_rec(net.roots[r], x, path);
  }
  return total;
}

std::vector<double> parameter_gradient(const SymbolicNetwork& net, std::span<const double> x) {
  if (x.size() != net.input_dim) {
    throw DataError("input has " + std::to_string(x.size()) + " values, network expects " +
                    std::to_string(net.input_dim));
  }
  const CompiledNetwork compiled(net);
  const std::vector<double> params = parameters(net);
  std::vector<double> grad(params.size());
  CompiledNetwork::Scratch scratch;
  const double value = compiled.gradient(params, x, grad, scratch);
  if (auto bad = compiled.first_nonfinite(scratch)) {
    throw EvaluationError("non-finite output at node " + to_string(compiled.path_of(*bad)),
                          compiled.path_of(*bad));
  }
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i]) || !std::isfinite(value)) {
      throw EvaluationError("non-finite gradient component " + std::to_string(i), {});
    }
  }
  return grad;
}

std::size_t weight_count(const SymbolicNetwork& net) noexcept {
  std::size_t n = 0;
  for_each_node(net, [&](const ElementaryNode& node, const NodePath&) { n += node.params.size(); });
  return n;
}

std::size_t node_count(const SymbolicNetwork& net) noexcept {
  std::size_t n = 0;
  for_each_node(net, [&](const ElementaryNode&, const NodePath&) { ++n; });
  return n;
}

std::size_t depth(const SymbolicNetwork& net) noexcept {
  std::size_t d = 0;
  for_each_node(net, [&](const ElementaryNode&, const NodePath& p) { d = std::max(d, p.size()); });
  return d;
}

std::vector<double> parameters(const SymbolicNetwork& net) {
  std::vector<double> out;
  for_each_node(net, [&](const ElementaryNode& node, const NodePath&) {
    out.insert(out.end(), node.params.begin(), node.params.end());
  });
  return out;
}

void set_parameters(SymbolicNetwork& net, std::span<const double> values) {
  if (values.size() != weight_count(net)) {
    throw ModelError("set_parameters: expected " + std::to_string(weight_count(net)) +
                     " values, got " + std::to_string(values.size()));
  }
  std::size_t k = 0;
  for_each_node(net, [&](ElementaryNode& node, const NodePath&) {
    for (double& p : node.params) p = values[k++];
  });
}

std::vector<NodePath> node_paths(const SymbolicNetwork& net) {
  std::vector<NodePath> out;
  for_each_node(net, [&](const ElementaryNode&, const NodePath& p) { out.push_back(p); });
  return out;
}

const ElementaryNode& node_at(const SymbolicNetwork& net, const NodePath& path) {
  if (path.empty() || path[0] >= net.roots.size()) throw ModelError("bad node path");
  const ElementaryNode* node = &net.roots[path[0]];
  for (std::size_t i = 1; i < path.size(); ++i) {
    if (path[i] >= node->children.size()) throw ModelError("bad node path " + to_string(path));
    node = &node->children[path[i]];
  }
  return *node;
}

ElementaryNode& node_at(SymbolicNetwork& net, const NodePath& path) {
  return const_cast<ElementaryNode&>(node_at(std::as_const(net), path));
}

void remove_subtree(SymbolicNetwork& net, const NodePath& path) {
  if (path.empty()) throw ModelError("cannot remove the root list");
  if (path.size() == 1) {
    if (path[0] >= net.roots.size()) throw ModelError("bad node path " + to_string(path));
    net.roots.erase(net.roots.begin() + static_cast<std::ptrdiff_t>(path[0]));
    return;
  }
  NodePath parent_path(path.begin(), path.end() - 1);
  ElementaryNode& parent = node_at(net, parent_path);
  if (path.back() >= parent.children.size()) throw ModelError("bad node path " + to_string(path));
  parent.children.erase(parent.children.begin() + static_cast<std::ptrdiff_t>(path.back()));
}

CompiledNetwork::CompiledNetwork(const SymbolicNetwork& net) : input_dim_(net.input_dim) {
  // Pre-order numbering; children lists are filled once all slots exist.
  std::vector<const ElementaryNode*> nodes;
  for_each_node(net, [&](const ElementaryNode& node, const NodePath& p) {
    nodes.push_back(&node);
    paths_.push_back(p);
  });
  slots_.resize(nodes.size());
  std::uint32_t offset = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    slots_[i].kind = nodes[i]->kind;
    slots_[i].base = static_cast<std::uint32_t>(nodes[i]->base_input);
    slots_[i].offset = offset;
    offset += static_cast<std::uint32_t>(nodes[i]->params.size());
  }
  parameter_count_ = offset;

  // In pre-order, the children of node i are found by skipping whole subtrees.
  std::vector<std::uint32_t> subtree_size(nodes.size(), 1);
  for (std::size_t i = nodes.size(); i-- > 0;) {
    std::uint32_t next = static_cast<std::uint32_t>(i + 1);
    for (std::size_t c = 0; c < nodes[i]->children.size(); ++c) {
      subtree_size[i] += subtree_size[next];
      next += subtree_size[next];
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    slots_[i].first_child = static_cast<std::uint32_t>(child_index_.size());
    slots_[i].child_count = static_cast<std::uint32_t>(nodes[i]->children.size());
    std::uint32_t next = static_cast<std::uint32_t>(i + 1);
    for (std::size_t c = 0; c < nodes[i]->children.size(); ++c) {
      child_index_.push_back(next);
      next += subtree_size[next];
    }
  }
  std::uint32_t next = 0;
  for (std::size_t r = 0; r < net.roots.size(); ++r) {
    root_index_.push_back(next);
    next += subtree_size[next];
  }
}

double CompiledNetwork::forward(std::span<const double> params, std::span<const double> x,
                                Scratch& s, bool* clamped) const {
  const std::size_t n = slots_.size();
  s.u.resize(n);
  s.out.resize(n);
  bool hit = false;
  for (std::size_t i = n; i-- > 0;) {
    const Slot& slot = slots_[i];
    double u = x[slot.base];
    for (std::uint32_t c = 0; c < slot.child_count; ++c) u += s.out[child_index_[slot.first_child + c]];
    s.u[i] = u;
    s.out[i] = apply_kind(slot.kind, params.data() + slot.offset, u, hit);
  }
  if (clamped) *clamped = hit;
  double total = 0.0;
  for (std::uint32_t r : root_index_) total += s.out[r];
  return total;
}

double CompiledNetwork::evaluate(std::span<const double> params, std::span<const double> x,
                                 Scratch& scratch, bool* clamped) const {
  return forward(params, x, scratch, clamped);
}

double CompiledNetwork::gradient(std::span<const double> params, std::span<const double> x,
                                 std::span<double> grad, Scratch& s, bool* clamped) const {
  const std::size_t n = slots_.size();
  s.u.resize(n);
  s.out.resize(n);
  s.dout_du.resize(n);
  s.multiplier.resize(n);
  bool hit = false;
  for (std::size_t i = n; i-- > 0;) {
    const Slot& slot = slots_[i];
    double u = x[slot.base];
    for (std::uint32_t c = 0; c < slot.child_count; ++c) u += s.out[child_index_[slot.first_child + c]];
    s.u[i] = u;
    const KindValue kv = apply_kind_grad(slot.kind, params.data() + slot.offset, u, hit);
    s.out[i] = kv.out;
    s.dout_du[i] = kv.dout_du;
    const std::size_t np = sfn::parameter_count(slot.kind);
    for (std::size_t k = 0; k < np; ++k) grad[slot.offset + k] = kv.dparam[k];
  }
  if (clamped) *clamped = hit;
  for (std::uint32_t r : root_index_) s.multiplier[r] = 1.0;
  // Pre-order visits a parent before its children, so multipliers flow down.
  for (std::size_t i = 0; i < n; ++i) {
    const Slot& slot = slots_[i];
    const double m = s.multiplier[i];
    const std::size_t np = sfn::parameter_count(slot.kind);
    for (std::size_t k = 0; k < np; ++k) grad[slot.offset + k] *= m;
    const double down = m * s.dout_du[i];
    for (std::uint32_t c = 0; c < slot.child_count; ++c) s.multiplier[child_index_[slot.first_child + c]] = down;
  }
  double total = 0.0;
  for (std::uint32_t r : root_index_) total += s.out[r];
  return total;
}

bool CompiledNetwork::forward_rows(std::span<const double> params, const Matrix& inputs, Batch& b,
                                   std::span<double> outputs) const {
  const std::size_t n = slots_.size();
  b.rows = inputs.rows();
  b.u.resize(b.rows * n);
  b.out.resize(b.rows * n);
  b.aux.resize(b.rows * n);
  b.power.resize(b.rows * n);
  bool hit = false;
  for (std::size_t row = 0; row < b.rows; ++row) {
    const auto x = inputs.row(row);
    double* u_row = b.u.data() + row * n;
    double* out = b.out.data() + row * n;
    double* aux = b.aux.data() + row * n;
    double* power = b.power.data() + row * n;
    for (std::size_t i = n; i-- > 0;) {
      const Slot& slot = slots_[i];
      double u = x[slot.base];
      for (std::uint32_t c = 0; c < slot.child_count; ++c) u += out[child_index_[slot.first_child + c]];
      u_row[i] = u;
      const double* p = params.data() + slot.offset;
      switch (slot.kind) {
        case ElementaryKind::E1: {
          aux[i] = std::log1p(u * u);
          power[i] = std::exp(p[1] * aux[i]);
          out[i] = p[0] * power[i];
          break;
        }
        case ElementaryKind::E2: {
          double a = p[1] * u;
          if (a > kExponentClamp || a < -kExponentClamp) {
            hit = true;
            a = std::clamp(a, -kExponentClamp, kExponentClamp);
          }
          aux[i] = std::exp(a);
          out[i] = p[0] * aux[i];
          break;
        }
        case ElementaryKind::E3: {
          aux[i] = std::log1p(u * u);
          out[i] = p[0] * aux[i];
          break;
        }
      }
    }
    double total = 0.0;
    for (std::uint32_t r : root_index_) total += out[r];
    outputs[row] = total;
  }
  return hit;
}

void CompiledNetwork::gradient_row(std::span<const double> params, const Batch& b, std::size_t row,
                                   std::span<double> grad, Scratch& s) const {
  const std::size_t n = slots_.size();
  s.dout_du.resize(n);
  s.multiplier.resize(n);
  const double* u_row = b.u.data() + row * n;
  const double* aux = b.aux.data() + row * n;
  const double* power = b.power.data() + row * n;
  for (std::size_t i = 0; i < n; ++i) {
    const Slot& slot = slots_[i];
    const double* p = params.data() + slot.offset;
    double* g = grad.data() + slot.offset;
    const double u = u_row[i];
    switch (slot.kind) {
      case ElementaryKind::E1:
        s.dout_du[i] = p[0] * p[1] * power[i] * (2.0 * u / (1.0 + u * u));
        g[0] = power[i];
        g[1] = p[0] * power[i] * aux[i];
        break;
      case ElementaryKind::E2: {
        const double a = p[1] * u;
        const bool hit = a > kExponentClamp || a < -kExponentClamp;
        s.dout_du[i] = hit ? 0.0 : p[0] * p[1] * aux[i];
        g[0] = aux[i];
        g[1] = hit ? 0.0 : p[0] * u * aux[i];
        break;
      }
      case ElementaryKind::E3:
        s.dout_du[i] = p[0] * (2.0 * u / (1.0 + u * u));
        g[0] = aux[i];
        break;
    }
  }
  for (std::uint32_t r : root_index_) s.multiplier[r] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Slot& slot = slots_[i];
    const double m = s.multiplier[i];
    const std::size_t np = sfn::parameter_count(slot.kind);
    for (std::size_t k = 0; k < np; ++k) grad[slot.offset + k] *= m;
    const double down = m * s.dout_du[i];
    for (std::uint32_t c = 0; c < slot.child_count; ++c) s.multiplier[child_index_[slot.first_child + c]] = down;
  }
}

std::optional<std::size_t> CompiledNetwork::first_nonfinite(const Scratch& scratch) const {
  // Descendants always have higher pre-order indices, so the last non-finite
  // slot has only finite descendants and is where the blow-up started.
  for (std::size_t i = scratch.out.size(); i-- > 0;) {
    if (!std::isfinite(scratch.out[i])) return i;
  }
  return std::nullopt;
}

}  // namespace sfn
