#include "dietcalib/cli.hpp"

int main(int argc, char** argv) { return dietcalib::cli_main(argc, argv); }
