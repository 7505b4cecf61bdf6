#include "tunav/prelude.hpp"

#include <stdexcept>

namespace tunav {

std::vector<ProgramAst> load_prelude() {
  std::vector<ProgramAst> out;
  for (const auto& f : prelude_files()) {
    try {
      out.push_back(parse_module(f.source, "prelude/" + std::string(f.name)));
    } catch (const std::exception& e) {
      throw std::logic_error("embedded prelude is malformed: " + std::string(e.what()));
    }
  }
  return out;
}

bool is_prelude_module(const std::string& module) {
  return module == "prelude" || module.rfind("prelude::", 0) == 0;
}

}  // namespace tunav
