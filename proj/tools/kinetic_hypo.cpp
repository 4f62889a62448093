#include "khypo/cli.hpp"

int main(int argc, char** argv) { return khypo::cli_main(argc, argv); }
