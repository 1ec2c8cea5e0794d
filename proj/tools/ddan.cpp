#include "ddan/cli.hpp"

int main(int argc, char** argv) { return ddan::cli_main(argc, argv); }
