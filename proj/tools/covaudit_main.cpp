#include "covaudit/cli.hpp"

int main(int argc, char** argv) { return covaudit::cli::run(argc, argv); }
