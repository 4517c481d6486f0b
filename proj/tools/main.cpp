#include "rfmp/cli.hpp"

int main(int argc, char** argv) { return rfmp::cli::run(argc, argv); }
