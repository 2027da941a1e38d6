#include <string>
#include <vector>

#include "gapbench/app.hpp"

int main(int argc, char** argv) {
  return gapbench::app::run_cli(std::vector<std::string>(argv, argv + argc));
}
