#include "s2r/cli/app.hpp"

int main(int argc, char** argv) { return s2r::cli::run_cli(argc, argv); }
