#include "anoma/cli.hpp"

int main(int argc, char** argv) { return anoma::cli::main(argc, argv); }
