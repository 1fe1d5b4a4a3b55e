#include "tad/cli.hpp"

int main(int argc, char** argv) { return tad::cli::run(argc, argv); }
