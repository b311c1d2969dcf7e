#include <iostream>

#include "lepskii/cli.hpp"

int main(int argc, char** argv) {
  return lepskii::dispatch(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
