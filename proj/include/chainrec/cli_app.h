#pragma once

#include <iosfwd>

#include "chainrec/config.h"

namespace chainrec {

// Command entry points; each returns the process exit code
// (0 success, 1 inconclusive/failed analysis, 2 configuration error).
int cmd_classify(const RunConfig& cfg, std::ostream& out);
int cmd_chain(const RunConfig& cfg, std::ostream& out);
int cmd_certify(const RunConfig& cfg, std::ostream& out);
int cmd_fixedpoint(const RunConfig& cfg, std::ostream& out);
int cmd_plot(const RunConfig& cfg, std::ostream& out);

int run_cli(int argc, const char* const* argv);

} // namespace chainrec
