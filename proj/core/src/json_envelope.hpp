#pragma once

// Private helpers shared by the model-file readers. Not installed.

#include <string>
#include <string_view>

#include "json.hpp"
#include "sfn/error.hpp"
#include "sfn/model_io.hpp"

namespace sfn::detail {

using Json = nlohmann::ordered_json;

inline Json parse_json(std::string_view bytes) {
  try {
    return Json::parse(bytes.begin(), bytes.end());
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed model file: ") + e.what(), e.byte);
  }
}

template <typename T>
T field(const Json& obj, const char* name, const std::string& where) {
  if (!obj.is_object() || !obj.contains(name)) {
    throw ParseError("missing field '" + std::string(name) + "' in " + where, 0);
  }
  try {
    return obj.at(name).get<T>();
  } catch (const Json::exception&) {
    throw ParseError("field '" + std::string(name) + "' in " + where + " has the wrong type", 0);
  }
}

/// Checks version and kind; returns the parsed document.
inline Json open_envelope(std::string_view bytes, std::string_view expected_kind) {
  Json doc = parse_json(bytes);
  if (!doc.is_object()) throw ParseError("model file is not a JSON object", 0);
  const int version = field<int>(doc, "schema_version", "envelope");
  if (version != kSchemaVersion) throw VersionError(version, kSchemaVersion);
  const std::string kind = field<std::string>(doc, "kind", "envelope");
  if (kind != expected_kind) {
    throw ParseError("model kind '" + kind + "' where '" + std::string(expected_kind) +
                         "' was expected",
                     0);
  }
  return doc;
}

}  // namespace sfn::detail
