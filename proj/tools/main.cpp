#include "rgap/commands.hpp"

int main(int argc, char** argv) { return rgap::cli_main(argc, argv); }
