#include "diracsim.hpp"

#include <iostream>

int main(int argc, char** argv) { return diracsim::cli_main(argc, argv, std::cout, std::cerr); }
