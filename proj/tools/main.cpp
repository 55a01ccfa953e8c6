#include <iostream>

#include "fewsim/gateway/cli.hpp"

int main(int argc, char** argv) { return fewsim::gateway::run_cli(argc, argv, std::cout, std::cerr); }
