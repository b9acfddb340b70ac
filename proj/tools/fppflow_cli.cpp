#include "fppflow/cli.hpp"

int main(int argc, char** argv) { return fppflow::cli::run(argc, argv); }
