#include "funsat/cli.hpp"

int main(int argc, char **argv) { return funsat::cli::run(argc, argv); }
