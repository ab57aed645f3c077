#include "resfront/cli.hpp"

int main(int argc, char** argv) { return resfront::cli::run(argc, argv); }
