#include "cli.hpp"

int main(int argc, char** argv) { return nuq::cli::run(argc, argv); }
