#include <vector>

#include "taintfuzz/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return taintfuzz::cli::run(args);
}
