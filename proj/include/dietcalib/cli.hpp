#pragma once

namespace dietcalib {

// Command-line entry point (run | summarize | plot | show-defaults).
// Returns the process exit code: 0 on success, 1 for configuration or
// input-validation errors, 2 for runtime failures (I/O, simulation).
int cli_main(int argc, const char* const* argv);

}  // namespace dietcalib
