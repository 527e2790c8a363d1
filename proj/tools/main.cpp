#include "polalign/cli.hpp"

int main(int argc, char** argv) { return polalign::run_cli(argc, argv); }
