#include "maglap/cli.hpp"

int main(int argc, char** argv) { return maglap::cli::run_cli(argc, argv); }
