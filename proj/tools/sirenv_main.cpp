#include "sirenv/cli.hpp"

int main(int argc, char** argv) { return sirenv::cli::run(argc, argv); }
