#include "swe/cli.hpp"

int main(int argc, char** argv) { return swe::cli::run(argc, argv); }
