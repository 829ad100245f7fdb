#include <iostream>

#include "sdae_app/commands.hpp"

int main(int argc, char** argv) { return sdae::app::run(argc, argv, std::cout, std::cerr); }
