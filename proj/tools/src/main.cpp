#include <iostream>

#include "app.hpp"

int main(int argc, char** argv) { return trustcf::cli::run(argc, argv, std::cout, std::cerr); }
