#include <cstring>
#include <iostream>

#include "acceptance.hpp"

int main(int argc, char** argv) {
  vmrd::tools::AcceptanceOptions opt;
  for (int k = 1; k < argc; ++k) {
    if (std::strcmp(argv[k], "--fast") == 0) opt.fast_only = true;
  }
  const auto results = vmrd::tools::run_acceptance(opt);
  vmrd::tools::print_report(std::cout, results);
  return vmrd::tools::all_passed(results) ? 0 : 1;
}
