#pragma once

namespace hbvm::cli {

/// Entry point of the `hbvm` tool. Exit codes: 0 all verdicts pass,
/// 1 some verdict failed, 2 usage or runtime error.
int run(int argc, char** argv);

}  // namespace hbvm::cli
