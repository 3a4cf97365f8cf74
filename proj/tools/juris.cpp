#include <string>
#include <vector>

#include "juris/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return juris::run_command(args);
}
