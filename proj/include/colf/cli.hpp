#pragma once

// Command-line front end. One command per process over a single .colf file:
// check, unfold, validity, erase, parse.

#include <cstddef>
#include <iosfwd>
#include <string>

#include "colf/syntax.hpp"

namespace colf {

struct CliConfig {
  std::string command;  // check | unfold | validity | erase | parse
  std::string path;
  std::string name;  // unfold / erase subject
  Depth depth = 4;
  bool json = false;
  bool show_implicit = false;
  std::size_t max_memo_entries = 1 << 20;
  bool color = false;
};

// Runs one configured command, writing results to `out` and usage or IO
// complaints to `err`. Returns 0 when clean, 1 when diagnostics were
// produced, 2 on usage or IO errors.
int run_command(const CliConfig& cfg, std::ostream& out, std::ostream& err);

// argv front end over run_command; honors COLFW_COLOR=never|auto.
int run_cli(int argc, char** argv);

}  // namespace colf
