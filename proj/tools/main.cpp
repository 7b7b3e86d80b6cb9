#include "mfnc/cli.hpp"

int main(int argc, char** argv) { return mfnc::run_cli(argc, argv); }
