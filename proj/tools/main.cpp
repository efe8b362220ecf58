#include "selfscore/cli.hpp"

int main(int argc, char** argv) { return selfscore::run_cli(argc, argv); }
