#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mdual {

struct VerifyOptions {
  /// Upper bound on every population or ground-set size; each check uses
  /// min(its own size, max_n).
  int max_n = 12;
  std::uint64_t seed = 20240611;
  std::size_t mc_reps = 100000;
  /// Random kernels per duality variant for the positivity criterion.
  unsigned random_kernels = 120;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  /// Whether the check ran to completion (no exception).
  bool completed = false;
  std::string detail;
  /// Wall-clock seconds; never written to reports.
  double seconds = 0.0;
};

CriterionResult check_inverse_identities(const VerifyOptions& o);
CriterionResult check_closed_form_moebius(const VerifyOptions& o);
CriterionResult check_product_formula(const VerifyOptions& o);
CriterionResult check_positivity_equivalence(const VerifyOptions& o);
CriterionResult check_strong_monotonicity(const VerifyOptions& o);
CriterionResult check_coarse_set_matrices(const VerifyOptions& o);
CriterionResult check_coarse_cannings(const VerifyOptions& o);
CriterionResult check_hypergeometric(const VerifyOptions& o);
CriterionResult check_wright_fisher_hand_values(const VerifyOptions& o);
CriterionResult check_monte_carlo(const VerifyOptions& o);
/// Passes when every earlier criterion ran to completion: the acceptance
/// suite consists of exact identities plus one seed-pinned statistical test.
CriterionResult check_exact_acceptance_scope(const std::vector<CriterionResult>& earlier);

std::vector<CriterionResult> run_all_criteria(const VerifyOptions& o);

/// Deterministic JSON report (no timings).
std::string criteria_report_json(const VerifyOptions& o, const std::vector<CriterionResult>& results);

}  // namespace mdual
