#include "json_util.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "elodec/errors.hpp"

namespace elodec::detail {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

Json parse_document(const std::string& text, std::string_view format, int version) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("malformed ") + std::string(format) + " document: " + e.what());
  }
  if (!doc.is_object()) throw FormatError(std::string(format) + " document is not an object");
  const std::string where = std::string(format) + " header";
  const auto found = field<std::string>(doc, "format", where);
  if (found != format) {
    throw FormatError("expected a " + std::string(format) + " document, found " + found);
  }
  const int found_version = field<int>(doc, "version", where);
  if (found_version != version) {
    throw VersionMismatch("incompatible " + std::string(format) + " version " +
                          std::to_string(found_version) + " (this build reads version " +
                          std::to_string(version) + ")");
  }
  return doc;
}

std::string dump_document(const Json& doc) { return doc.dump(2) + "\n"; }

void throw_missing(const char* key, std::string_view where) {
  throw FormatError(std::string(where) + ": missing field '" + key + "'");
}

void throw_bad(const char* key, std::string_view where, const char* why) {
  throw FormatError(std::string(where) + ": bad field '" + key + "': " + why);
}

}  // namespace elodec::detail
