#include "mlrepair/cli.hpp"

int main(int argc, char** argv) { return mlrepair::run_cli(argc, argv); }
