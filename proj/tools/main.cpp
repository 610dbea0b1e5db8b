#include "esakit/cli.hpp"

int main(int argc, char** argv) { return esakit::cli::run(argc, argv); }
