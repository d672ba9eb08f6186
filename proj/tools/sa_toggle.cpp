#include <iostream>

#include "satoggle/cli.hpp"

int main(int argc, char** argv) {
  return satoggle::run_cli(argc, argv, std::cout, std::cerr);
}
