#include "camo/cli.hpp"

int main(int argc, char** argv) { return camo::run_cli(argc, argv); }
