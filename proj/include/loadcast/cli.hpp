#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace loadcast::cli {

// Entry point of the v2x_loadcast tool. Returns the process exit code:
// 0 on success, 1 on pipeline or config errors (after printing one
// `error: module=... kind=... message="..."` line to `err`), 2 on a
// failed gradient check, and CLI11's code for bad command lines.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

}  // namespace loadcast::cli
