#include "cli.hpp"

int main(int argc, char** argv) { return lastiter::cli::main_entry(argc, argv); }
