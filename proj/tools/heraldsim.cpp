#include "heraldsim/cli.hpp"

int main(int argc, char** argv) { return heraldsim::run_cli(argc, argv); }
