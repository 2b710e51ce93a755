#include "msb/cli.hpp"

int main(int argc, char** argv) { return msb::cli_main(argc, argv); }
