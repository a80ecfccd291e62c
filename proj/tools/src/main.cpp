#include "cli.hpp"

int main(int argc, char** argv) { return conescoop::cli_main(argc, argv); }
