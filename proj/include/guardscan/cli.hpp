#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace guardscan {

/// Entry point of the guardscan tool. Returns 0 on success, 2 on usage errors, 1 on runtime
/// errors. Data goes to `out`, diagnostics to `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace guardscan
