#include "evolve/cli.hpp"

int main(int argc, char** argv) { return evolve::cli::run_cli(argc, argv); }
