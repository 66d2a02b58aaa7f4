#include "pcp/cli.hpp"

int main(int argc, char** argv) { return pcp::cli::run_cli(argc, argv); }
