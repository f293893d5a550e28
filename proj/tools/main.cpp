#include <string>
#include <vector>

#include "summaug/cli.hpp"

int main(int argc, char** argv) {
  return summaug::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
