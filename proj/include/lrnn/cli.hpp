#pragma once

namespace lrnn {

/// Entry point of the command line tool. Returns 0 on success, 1 on runtime
/// failure, 2 on usage errors.
int cli_main(int argc, const char* const* argv);

}  // namespace lrnn
