#include "renorm_cli.hpp"

int main(int argc, char** argv) { return renorm::cli::main(argc, argv); }
