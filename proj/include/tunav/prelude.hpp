#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tunav/syntax.hpp"

namespace tunav {

struct PreludeFile {
  std::string_view name;  // file name, e.g. "seq.tv"
  std::string_view source;
};

/// The embedded standard library sources, in dependency order.
const std::vector<PreludeFile>& prelude_files();

/// Parses the embedded sources. Throws if any of them fails to parse.
std::vector<ProgramAst> load_prelude();

bool is_prelude_module(const std::string& module);

}  // namespace tunav
