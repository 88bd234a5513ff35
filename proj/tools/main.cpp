#include <string>
#include <vector>

#include "wanderlab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return wanderlab::cli_run(std::move(args));
}
