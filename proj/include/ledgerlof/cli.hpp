#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ledgerlof::cli {

/// Runs the command line tool. Returns 0 on success, 2 for usage or input
/// format problems and 1 when a pipeline stage fails. Errors are reported on
/// `err` as one line: `error<TAB>kind=<kind><TAB>message=<text>`.
int run(std::vector<std::string> args, std::ostream &out, std::ostream &err);

} // namespace ledgerlof::cli
