#include "qbc/cli.hpp"

int main(int argc, char** argv) { return qbc::cli_main(argc, argv); }
