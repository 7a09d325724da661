#include <iostream>

#include "maxcorr_cli/app.hpp"

int main(int argc, char** argv) {
  return maxcorr::cli::run(argc, argv, std::cout, std::cerr);
}
