#include "hfl/cli.hpp"

int main(int argc, char** argv) { return hfl::run_cli(argc, argv); }
