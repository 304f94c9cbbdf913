#include "sfn/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json_envelope.hpp"
#include "sfn/error.hpp"

namespace sfn {
namespace {

using detail::field;
using detail::Json;

Json node_to_json(const ElementaryNode& node) {
  Json j;
  j["kind"] = std::string(to_string(node.kind));
  j["params"] = node.params;
  j["base_input"] = node.base_input;
  Json children = Json::array();
  for (const ElementaryNode& c : node.children) children.push_back(node_to_json(c));
  j["children"] = std::move(children);
  return j;
}

ElementaryNode node_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError("node record " + where + " is not an object", 0);
  const std::string kind_text = field<std::string>(j, "kind", where);
  const auto kind = parse_kind(kind_text);
  if (!kind) throw ParseError("unknown node kind '" + kind_text + "' at " + where, 0);
  ElementaryNode node;
  node.kind = *kind;
  node.params = field<std::vector<double>>(j, "params", where);
  node.base_input = field<std::size_t>(j, "base_input", where);
  const Json children = j.contains("children") ? j.at("children") : Json::array();
  if (!children.is_array()) throw ParseError("children of " + where + " is not an array", 0);
  for (std::size_t c = 0; c < children.size(); ++c) {
    node.children.push_back(node_from_json(children[c], where + "." + std::to_string(c)));
  }
  return node;
}

}  // namespace

std::string serialize_model(const ModelFile& model) {
  Json doc;
  doc["schema_version"] = model.schema_version;
  doc["kind"] = "sfn";
  doc["provenance"] = model.provenance;
  Json net;
  net["input_dim"] = model.network.input_dim;
  Json roots = Json::array();
  for (const ElementaryNode& r : model.network.roots) roots.push_back(node_to_json(r));
  net["roots"] = std::move(roots);
  doc["network"] = std::move(net);
  if (model.input_scaling) {
    Json ranges = Json::array();
    for (const InputRange& r : *model.input_scaling) ranges.push_back(Json::array({r.min, r.max}));
    doc["input_scaling"] = std::move(ranges);
  }
  return doc.dump(2) + "\n";
}

ModelFile parse_model(std::string_view bytes) {
  const Json doc = detail::open_envelope(bytes, "sfn");
  ModelFile model;
  model.schema_version = kSchemaVersion;
  model.provenance = doc.contains("provenance") ? field<std::string>(doc, "provenance", "envelope")
                                                 : std::string{};
  if (!doc.contains("network")) throw ParseError("missing field 'network'", 0);
  const Json& net = doc.at("network");
  model.network.input_dim = field<std::size_t>(net, "input_dim", "network");
  if (!net.contains("roots") || !net.at("roots").is_array()) {
    throw ParseError("network.roots must be an array", 0);
  }
  const Json& roots = net.at("roots");
  for (std::size_t r = 0; r < roots.size(); ++r) {
    model.network.roots.push_back(node_from_json(roots[r], "r" + std::to_string(r)));
  }
  if (doc.contains("input_scaling") && !doc.at("input_scaling").is_null()) {
    const Json& ranges = doc.at("input_scaling");
    if (!ranges.is_array() || ranges.size() != model.network.input_dim) {
      throw ParseError("input_scaling must hold one [min, max] pair per input", 0);
    }
    std::vector<InputRange> scaling;
    for (const Json& pair : ranges) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
        throw ParseError("input_scaling entries must be [min, max]", 0);
      }
      scaling.push_back({pair[0].get<double>(), pair[1].get<double>()});
    }
    model.input_scaling = std::move(scaling);
  }
  validate(model.network);
  return model;
}

std::string model_kind(std::string_view bytes) {
  const Json doc = detail::parse_json(bytes);
  return field<std::string>(doc, "kind", "envelope");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

std::vector<double> scale_inputs(const ModelFile& model, std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  if (!model.input_scaling) return out;
  const auto& ranges = *model.input_scaling;
  for (std::size_t i = 0; i < out.size() && i < ranges.size(); ++i) {
    const double width = ranges[i].max - ranges[i].min;
    out[i] = width == 0.0 ? 0.0 : (out[i] - ranges[i].min) / width;
  }
  return out;
}

double predict(const ModelFile& model, std::span<const double> x) {
  const std::vector<double> scaled = scale_inputs(model, x);
  return evaluate(model.network, scaled);
}

}  // namespace sfn
