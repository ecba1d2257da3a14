#include "mhne/cli.hpp"

int main(int argc, char** argv) { return mhne::cli::run(argc, argv); }
