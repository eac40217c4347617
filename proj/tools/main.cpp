#include "dispatch.hpp"

int main(int argc, char** argv) {
  return betaspec::cli::run_cli(argc, argv, std::cout, std::cerr);
}
