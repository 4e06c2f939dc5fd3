#include "colf/cli.hpp"

int main(int argc, char** argv) { return colf::run_cli(argc, argv); }
