#include "cli/commands.hpp"

int main(int argc, char** argv) { return vup::cli::run_cli(argc, argv); }
