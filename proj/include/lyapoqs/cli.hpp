#pragma once

namespace lyapoqs {

// Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
int run_cli(int argc, char** argv);

}  // namespace lyapoqs
