#include "pave/harness.hpp"

int main(int argc, char** argv) { return pave::run_cli(argc, argv); }
