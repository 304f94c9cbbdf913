#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sfn/dataset.hpp"

namespace sfn {

/// The three tunable elementary functions. With u the node argument:
///   E1(u) = w (u^2 + 1)^v      params {w, v}
///   E2(u) = q exp(alpha u)     params {q, alpha}
///   E3(u) = p log(u^2 + 1)     params {p}
/// The first parameter of every kind is its output scale.
enum class ElementaryKind : std::uint8_t { E1, E2, E3 };

inline constexpr ElementaryKind kAllKinds[] = {ElementaryKind::E1, ElementaryKind::E2,
                                               ElementaryKind::E3};

constexpr std::size_t parameter_count(ElementaryKind kind) noexcept {
  return kind == ElementaryKind::E3 ? 1 : 2;
}

std::string_view to_string(ElementaryKind kind) noexcept;
std::optional<ElementaryKind> parse_kind(std::string_view text) noexcept;

/// Exponents of E2 are clamped to this magnitude before exp().
inline constexpr double kExponentClamp = 500.0;

/// One elementary function in the tree. Its argument is
///   u = x[base_input] + sum of children outputs.
struct ElementaryNode {
  ElementaryKind kind = ElementaryKind::E1;
  std::vector<double> params;
  std::size_t base_input = 0;
  std::vector<ElementaryNode> children;

  friend bool operator==(const ElementaryNode&, const ElementaryNode&) = default;
};

/// Builds a node, throwing ModelError when params.size() does not match the kind.
ElementaryNode make_node(ElementaryKind kind, std::vector<double> params, std::size_t base_input,
                         std::vector<ElementaryNode> children = {});

/// Sum of root outputs. No roots is the zero model.
struct SymbolicNetwork {
  std::size_t input_dim = 1;
  std::vector<ElementaryNode> roots;

  friend bool operator==(const SymbolicNetwork&, const SymbolicNetwork&) = default;
};

/// Root index followed by child indices. A node's level is path.size(), so roots
/// are level 1.
using NodePath = std::vector<std::size_t>;

std::string to_string(const NodePath& path);

/// Throws ModelError on any invariant violation.
void validate(const SymbolicNetwork& net);

/// Evaluates one node (and its subtree). Throws EvaluationError on a
/// non-finite result; the error path is relative to `node`.
double evaluate(const ElementaryNode& node, std::span<const double> x);

/// Throws EvaluationError carrying the full node path on a non-finite result.
double evaluate(const SymbolicNetwork& net, std::span<const double> x);

/// d(output)/d(params) in canonical order: depth-first pre-order over nodes,
/// roots in order, each node's params in kind order.
std::vector<double> parameter_gradient(const SymbolicNetwork& net, std::span<const double> x);

std::size_t weight_count(const SymbolicNetwork& net) noexcept;
std::size_t node_count(const SymbolicNetwork& net) noexcept;
/// Number of levels; 0 for the empty network.
std::size_t depth(const SymbolicNetwork& net) noexcept;

/// All parameters in canonical order.
std::vector<double> parameters(const SymbolicNetwork& net);
void set_parameters(SymbolicNetwork& net, std::span<const double> values);

/// Paths of every node in canonical (pre-order) order.
std::vector<NodePath> node_paths(const SymbolicNetwork& net);
const ElementaryNode& node_at(const SymbolicNetwork& net, const NodePath& path);
ElementaryNode& node_at(SymbolicNetwork& net, const NodePath& path);
/// Removes the node at `path` together with its subtree.
void remove_subtree(SymbolicNetwork& net, const NodePath& path);

/// Flattened, evaluation-ready view of a network's structure. Parameters are
/// supplied separately so optimizers can probe many parameter vectors against
/// one structure. Summation order matches the tree evaluation above exactly,
/// so both routes give bit-identical values.
class CompiledNetwork {
 public:
  struct Scratch {
    std::vector<double> u;
    std::vector<double> out;
    std::vector<double> dout_du;
    std::vector<double> multiplier;
  };

  explicit CompiledNetwork(const SymbolicNetwork& net);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t node_count() const noexcept { return slots_.size(); }
  std::size_t parameter_count() const noexcept { return parameter_count_; }

  /// Output at x. Sets *clamped when any exponent hit the clamp. May return a
  /// non-finite value; callers decide how to treat it.
  double evaluate(std::span<const double> params, std::span<const double> x, Scratch& scratch,
                  bool* clamped = nullptr) const;

  /// Output at x, writing d(output)/d(params) into `grad`.
  double gradient(std::span<const double> params, std::span<const double> x,
                  std::span<double> grad, Scratch& scratch, bool* clamped = nullptr) const;

  /// Per-row node intermediates from forward_rows, reused by gradient_row so
  /// a Jacobian costs no further exp/log evaluations.
  struct Batch {
    std::size_t rows = 0;
    std::vector<double> u;
    std::vector<double> out;
    std::vector<double> aux;    // log(u^2 + 1) for E1/E3, exp(alpha u) for E2
    std::vector<double> power;  // (u^2 + 1)^v for E1
  };

  /// Outputs for every row of `inputs` into `outputs`, bit-identical to
  /// evaluate(). Returns true if any exponent hit the clamp.
  bool forward_rows(std::span<const double> params, const Matrix& inputs, Batch& batch,
                    std::span<double> outputs) const;

  /// Same as gradient() at row `row` of the inputs last passed to forward_rows.
  void gradient_row(std::span<const double> params, const Batch& batch, std::size_t row,
                    std::span<double> grad, Scratch& scratch) const;

  /// Index (pre-order) of the first non-finite node output from the last evaluation.
  std::optional<std::size_t> first_nonfinite(const Scratch& scratch) const;

  const NodePath& path_of(std::size_t slot) const { return paths_[slot]; }

 private:
  struct Slot {
    ElementaryKind kind;
    std::uint32_t base;
    std::uint32_t offset;
    std::uint32_t first_child;
    std::uint32_t child_count;
  };

  double forward(std::span<const double> params, std::span<const double> x, Scratch& scratch,
                 bool* clamped) const;

  std::size_t input_dim_;
  std::size_t parameter_count_ = 0;
  std::vector<Slot> slots_;
  std::vector<std::uint32_t> child_index_;
  std::vector<std::uint32_t> root_index_;
  std::vector<NodePath> paths_;
};

}  // namespace sfn
