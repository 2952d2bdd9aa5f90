#include "commands.hpp"

int main(int argc, char** argv) { return ebv::cli::run(argc, argv); }
