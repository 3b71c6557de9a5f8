#include <iostream>
#include <string>
#include <vector>

#include "mfc/experiment.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mfc::run(args, std::cout, std::cerr);
}
