#include "samedge/cli.hpp"

int main(int argc, char** argv) { return samedge::run_cli(argc, argv); }
