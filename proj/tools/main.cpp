#include "kscore/cli.hpp"

int main(int argc, char** argv) { return kscore::run_cli(argc, argv); }
