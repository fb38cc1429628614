#pragma once

namespace misinfo::cli {

/// Entry point of the misinfo-forge tool. Returns 0 on success, 2 on usage
/// errors and 1 on data errors.
int run(int argc, const char* const* argv);

}  // namespace misinfo::cli
