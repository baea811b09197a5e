#include "crashrules/cli.hpp"

int main(int argc, char** argv) { return crashrules::cli::run(argc, argv); }
