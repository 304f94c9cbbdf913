#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sfn/network.hpp"

namespace sfn {

inline constexpr int kSchemaVersion = 1;

/// Per-input min-max scaling applied before evaluation: x' = (x - min) / (max - min).
struct InputRange {
  double min = 0.0;
  double max = 1.0;

  friend bool operator==(const InputRange&, const InputRange&) = default;
};

struct ModelFile {
  int schema_version = kSchemaVersion;
  SymbolicNetwork network;
  std::optional<std::vector<InputRange>> input_scaling;
  std::string provenance;

  friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

/// JSON text. Doubles are written in shortest round-trip form, so parsing the
/// output restores every parameter bit for bit.
///
///   {"schema_version": 1, "kind": "sfn", "provenance": "...",
///    "network": {"input_dim": 2, "roots": [
///        {"kind": "E1", "params": [w, v], "base_input": 0, "children": [...]}]},
///    "input_scaling": [[min, max], ...]}        (optional)
std::string serialize_model(const ModelFile& model);

/// Throws ParseError (malformed or structurally invalid), VersionError
/// (schema_version mismatch), or ModelError (invariants).
ModelFile parse_model(std::string_view bytes);

/// The "kind" field of a model envelope ("sfn", "mlp", ...). Throws ParseError.
std::string model_kind(std::string_view bytes);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Inputs after the model's optional scaling.
std::vector<double> scale_inputs(const ModelFile& model, std::span<const double> x);

double predict(const ModelFile& model, std::span<const double> x);

}  // namespace sfn
