// Runs the acceptance matrix and prints one line per criterion.
#include <cstring>
#include <iostream>

#include "inversio/acceptance.hpp"

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
  const auto results = inversio::run_acceptance(quick, [](const std::string& line) {
    std::cerr << "  " << line << "\n";
  });
  inversio::print_acceptance(std::cout, results);
  for (const auto& r : results)
    if (!r.pass) return 1;
  return 0;
}
