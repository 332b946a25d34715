#include "rrsplit/cli.hpp"

int main(int argc, char** argv) { return rrsplit::cli::run_cli(argc, argv); }
