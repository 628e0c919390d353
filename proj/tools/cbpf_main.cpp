#include "cbpf/cli.hpp"

int main(int argc, char** argv) { return cbpf::run_cli(argc, argv); }
