#pragma once

// Shared helpers for the versioned JSON documents (private to the library).

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace elodec::detail {

using Json = nlohmann::ordered_json;

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Parses `text` and checks its "format" and "version" header fields.
// Throws FormatError on a parse failure or wrong format name and
// VersionMismatch on a different version.
Json parse_document(const std::string& text, std::string_view format, int version);

// Two-space indented dump with a trailing newline.
std::string dump_document(const Json& doc);

[[noreturn]] void throw_missing(const char* key, std::string_view where);
[[noreturn]] void throw_bad(const char* key, std::string_view where, const char* why);

// Typed field access that names the offending field in its FormatError.
template <typename T>
T field(const Json& object, const char* key, std::string_view where) {
  auto it = object.find(key);
  if (it == object.end()) {
    throw_missing(key, where);
  }
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw_bad(key, where, e.what());
  }
}

template <typename T>
T field_or(const Json& object, const char* key, T fallback, std::string_view where) {
  if (!object.contains(key)) return fallback;
  return field<T>(object, key, where);
}

}  // namespace elodec::detail
