#include "invextopo/cli.hpp"

int main(int argc, char** argv) { return invextopo::run_cli(argc, argv); }
