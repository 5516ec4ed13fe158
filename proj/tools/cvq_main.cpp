#include "cvq/cli.hpp"

int main(int argc, char** argv) { return cvq::cli::run(argc, argv); }
