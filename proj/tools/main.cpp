#include "lyapoqs/cli.hpp"

int main(int argc, char** argv) { return lyapoqs::run_cli(argc, argv); }
