#include "xtomo/cli.hpp"

int main(int argc, char** argv) { return xtomo::cli::run(argc, argv); }
