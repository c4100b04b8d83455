#include "imcf/cli.hpp"

int main(int argc, char** argv) { return imcf::cli::main(argc, argv); }
