#include <string>
#include <vector>

#include "cdaloc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cdaloc::run_cli(args);
}
