#include "kgnf/cli.hpp"

int main(int argc, char** argv) { return kgnf::run_cli(argc, argv); }
