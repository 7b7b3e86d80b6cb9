#pragma once

#include <string>
#include <vector>

namespace mfnc {

/// Exit codes: 0 ok, 1 usage or config error, 2 assumption/validation failure,
/// 3 numerical failure.
int run_cli(int argc, char** argv);

}  // namespace mfnc
