#pragma once

namespace roadsentry::cli {

/// Runs one subcommand. Returns 0 on success, 1 for usage errors, 2 for
/// data or I/O errors and 3 for processing errors.
int dispatch(int argc, char** argv);

}  // namespace roadsentry::cli
