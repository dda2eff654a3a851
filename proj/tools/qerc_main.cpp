#include "qerc/cli.hpp"

int main(int argc, char** argv) { return qerc::cli::run(argc, argv); }
