#include <vector>

#include "cggm/cli.hpp"

int main(int argc, char** argv) {
  return cggm::cli_run(std::vector<std::string>(argv + 1, argv + argc));
}
