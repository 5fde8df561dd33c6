#include "lrnn/cli.hpp"

int main(int argc, char** argv) { return lrnn::cli_main(argc, argv); }
