#include "rrl/cli.hpp"

int main(int argc, char** argv) { return rrl::cli::main(argc, argv); }
