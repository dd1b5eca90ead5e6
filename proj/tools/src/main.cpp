#include <iostream>

#include "relscope/pipeline.hpp"

int main(int argc, char** argv) { return relscope::cli::run(argc, argv, std::cout, std::cerr); }
