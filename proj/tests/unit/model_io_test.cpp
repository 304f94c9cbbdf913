#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "sfn/error.hpp"
#include "sfn/model_io.hpp"
#include "support.hpp"

namespace sfn {
namespace {

TEST(ModelIo, RoundTripIsBitExact) {
  Rng rng(12);
  for (int n = 0; n < 30; ++n) {
    ModelFile m;
    m.network = testing::random_network(rng);
    auto p = parameters(m.network);
    for (auto& v : p) v = rng.normal() * std::pow(10.0, rng.uniform(-8, 8));
    set_parameters(m.network, p);
    if (n % 2) m.input_scaling = std::vector<InputRange>(m.network.input_dim, InputRange{-3.5, 0.1});
    m.provenance = "seed=" + std::to_string(n);
    const auto text = serialize_model(m);
    const auto back = parse_model(text);
    EXPECT_EQ(back, m);
    EXPECT_EQ(serialize_model(back), text);
  }
}

TEST(ModelIo, Kind) {
  ModelFile m;
  m.network = testing::reference_network();
  EXPECT_EQ(model_kind(serialize_model(m)), "sfn");
  EXPECT_THROW(model_kind("not json"), ParseError);
}

TEST(ModelIo, ParseErrorOffset) {
  ModelFile m;
  m.network = testing::reference_network();
  auto text = serialize_model(m);
  text.resize(text.size() / 2);
  try {
    parse_model(text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_LE(e.offset(), text.size() + 1);
    EXPECT_GT(e.offset(), 0u);
  }
}

TEST(ModelIo, VersionAndKindMismatch) {
  EXPECT_THROW(parse_model(R"({"schema_version": 7, "kind": "sfn", "network": {"input_dim": 1, "roots": []}})"),
               VersionError);
  EXPECT_THROW(parse_model(R"({"schema_version": 1, "kind": "mlp", "network": {"input_dim": 1, "roots": []}})"),
               ParseError);
  EXPECT_THROW(parse_model(R"({"schema_version": 1, "kind": "sfn", "network": {"input_dim": 1, "roots": [
      {"kind": "E1", "params": [1.0], "base_input": 0, "children": []}]}})"),
               ModelError);
  EXPECT_THROW(parse_model(R"({"schema_version": 1, "kind": "sfn", "network": {"input_dim": 1, "roots": [
      {"kind": "E9", "params": [1.0], "base_input": 0, "children": []}]}})"),
               ParseError);
}

TEST(ModelIo, ScaledPrediction) {
  ModelFile m;
  m.network.input_dim = 1;
  m.network.roots.push_back(make_node(ElementaryKind::E3, {1.0}, 0));
  m.input_scaling = std::vector<InputRange>{{10.0, 20.0}};
  const double x[] = {15.0};
  EXPECT_DOUBLE_EQ(scale_inputs(m, x)[0], 0.5);
  EXPECT_DOUBLE_EQ(predict(m, x), std::log(1.25));
}

TEST(ModelIo, Files) {
  const auto path = std::filesystem::temp_directory_path() / "sfn_model_io_test.json";
  write_text_file(path, "abc");
  EXPECT_EQ(read_text_file(path), "abc");
  std::filesystem::remove(path);
  EXPECT_THROW(read_text_file(path), DataError);
}

}  // namespace
}  // namespace sfn
