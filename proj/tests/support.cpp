#include "support.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace elodec::testing {

std::string fixture_path(const std::string& name) {
  return std::string(ELODEC_FIXTURE_DIR) + "/" + name;
}

std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name), std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace elodec::testing
