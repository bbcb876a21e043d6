#include "ptspec/cli.hpp"

int main(int argc, char** argv) { return ptspec::run_cli(argc, argv); }
