#include "cli.hpp"

int main(int argc, char** argv) { return rbc::cli::main_entry(argc, argv); }
