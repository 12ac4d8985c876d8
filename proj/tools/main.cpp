#include "facectl/cli.hpp"

int main(int argc, char** argv) { return facectl::run_cli(argc, argv); }
