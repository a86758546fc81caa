#include "nvdnp/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return nvdnp::cli::cli_dispatch(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
