#include <iostream>

#include "maxprob/acceptance.hpp"

int main(int argc, char** argv) {
  maxprob::AcceptanceOptions opts;
  opts.artifact_dir = argc > 1 ? argv[1] : "acceptance_artifacts";
  const auto results = maxprob::run_acceptance(opts);
  std::cout << maxprob::render_table(results);
  return maxprob::all_passed(results) ? 0 : 1;
}
