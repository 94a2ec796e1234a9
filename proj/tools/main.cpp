#include "cli.hpp"

int main(int argc, char** argv) { return lincf::cli::run(argc, argv); }
