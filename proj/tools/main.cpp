#include "cli.hpp"

int main(int argc, char** argv) { return egnn::cli::run(argc, argv); }
