#pragma once

// Runnable acceptance suite: one pass/fail result per criterion, rendered as
// a deterministic table (no timings), so repeated runs give identical bytes.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace maxprob {

struct CriterionResult {
  int id;
  std::string name;
  bool passed;
  std::string detail;
};

struct AcceptanceOptions {
  std::uint64_t seed = 0;
  // When set, training reports for the alpha and l2 runs are written here.
  std::optional<std::string> artifact_dir;
};

// Criteria 1-11, each with its own wall-clock limit folded into `passed`.
std::vector<CriterionResult> run_criteria(const AcceptanceOptions& opts);

// Criteria 1-11 plus criterion 12, which repeats the run and compares the
// rendered table and every artifact byte-for-byte.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

std::string render_table(const std::vector<CriterionResult>& results);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace maxprob
