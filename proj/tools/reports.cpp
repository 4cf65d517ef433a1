#include "reports.hpp"

#include <sstream>

namespace mdual::cli {

namespace {

void check(CanningsReport& rep, Json& section, const char* key, bool value) {
  section[key] = value;
  rep.passed = rep.passed && value;
}

void flatten(const Json& j, const std::string& prefix, std::ostringstream& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array() && !j.empty() && (j.front().is_object() || j.front().is_array())) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
  } else {
    out << prefix << ": " << (j.is_string() ? j.get<std::string>() : j.dump()) << "\n";
  }
}

}  // namespace

Json matrix_json(const LabeledMatrix& m) { return Json::parse(to_json(m, -1)); }

Json positivity_json(const PositivityReport& r, const FinitePoset& poset) {
  Json j;
  j["variant"] = to_string(r.variant);
  j["condition_i"] = r.condition_i;
  j["Q_nonnegative"] = r.q_nonnegative;
  j["agreement"] = r.agreement;
  auto witnesses = Json::array();
  for (const auto& w : r.witnesses)
    witnesses.push_back({{"index", poset.label(w.index)}, {"element", poset.label(w.element)}, {"value", format_rational(w.value)}});
  j["witnesses"] = std::move(witnesses);
  return j;
}

Json strong_json(const StrongConditionReport& r, const FinitePoset& poset) {
  Json j;
  j["condition_ii"] = r.condition_ii;
  auto failing = Json::array();
  for (auto m : r.failing_margins) failing.push_back(poset.label(m));
  j["failing_margins"] = std::move(failing);
  j["monotone"] = r.monotone ? Json(*r.monotone) : Json(nullptr);
  if (r.violation)
    j["violation"] = {{"fixed", poset.label(r.violation->fixed)},
                      {"lower", poset.label(r.violation->lower)},
                      {"upper", poset.label(r.violation->upper)}};
  j["invariant_in_cone"] = r.invariant_in_cone ? Json(*r.invariant_in_cone) : Json(nullptr);
  j["dual_invariant_monotone"] = r.dual_invariant_monotone ? Json(*r.dual_invariant_monotone) : Json(nullptr);
  return j;
}

CanningsReport cannings_report(const OffspringLaw& law, const std::string& model, int types) {
  CanningsReport rep;
  auto& j = rep.json;
  j["model"] = model;
  j["N"] = law.ground_size();
  j["T"] = types;
  j["atoms"] = law.atoms().size();
  j["exchangeable"] = law.exchangeable();
  j["parent_exchangeable"] = law.parent_exchangeable();

  if (types <= 1) {
    const auto fk = forward_kernel(law);
    const auto bk = backward_kernel(law);
    const auto dual = verify_transpose_zeta_duality(fk, bk);
    Json set;
    check(rep, set, "P_stochastic", fk.p.stochastic());
    check(rep, set, "Q_stochastic", bk.q.stochastic());
    check(rep, set, "duality_conjugation", dual.conjugation);
    check(rep, set, "duality_sylvester", dual.sylvester);
    j["set_chains"] = std::move(set);
    if (law.exchangeable()) {
      const auto c = coarsen_to_cannings(law, fk, bk);
      Json coarse;
      check(rep, coarse, "Q_equals_backward_kernel", c.q_is_backward);
      check(rep, coarse, "P_coarse_stochastic", c.pipeline.p_coarse_kind == KernelKind::Stochastic);
      check(rep, coarse, "Q_hat_stochastic", c.pipeline.q_hat_kind == KernelKind::Stochastic);
      check(rep, coarse, "coarse_duality", c.pipeline.coarse_duality);
      check(rep, coarse, "h_hat_duality", c.pipeline.hat_duality);
      check(rep, coarse, "inverse_commutes", c.pipeline.inverse_commutes);
      check(rep, coarse, "P_coarse_direct_formula", c.p_matches_direct);
      check(rep, coarse, "h_hat_binomial", c.h_hat_binomial);
      check(rep, coarse, "hypergeometric_closed_form", c.h_hat_matches);
      check(rep, coarse, "hypergeometric_inverse_closed_form", c.h_hat_inverse_matches);
      check(rep, coarse, "Q_hat_moment_formula", c.q_matches_moment);
      std::vector<std::string> labels;
      for (int k = 0; k <= law.ground_size(); ++k) labels.push_back(std::to_string(k));
      coarse["P_coarse"] = matrix_json(with_labels(c.pipeline.p_coarse, labels));
      coarse["Q_hat"] = matrix_json(with_labels(c.pipeline.q_hat.matrix, labels));
      coarse["H_hat"] = matrix_json(with_labels(c.pipeline.h_hat_coarse, labels));
      j["coarse"] = std::move(coarse);
    }
  } else {
    const auto ma = multiallelic_kernels(law, types);
    const auto dual = verify_multiallelic_duality(ma);
    Json set;
    set["states"] = ma.size();
    set["covering_states"] = ma.covering.size();
    check(rep, set, "P_stochastic", ma.p_stochastic);
    check(rep, set, "covering_states_closed", ma.covering_closed);
    check(rep, set, "Q_substochastic", ma.q_substochastic);
    check(rep, set, "duality_identity", dual.identity);
    check(rep, set, "duality_sylvester", dual.sylvester);
    std::size_t lossy = 0;
    for (const auto& d : ma.defect) lossy += d != 0 ? 1 : 0;
    set["rows_with_mass_defect"] = lossy;
    j["set_chains"] = std::move(set);
    if (law.exchangeable()) {
      const auto c = coarsen_multiallelic(law, ma);
      Json coarse;
      check(rep, coarse, "P_coarse_stochastic", c.p_coarse_stochastic);
      check(rep, coarse, "Q_hat_substochastic", c.q_hat_substochastic);
      check(rep, coarse, "coarse_duality", c.coarse_duality);
      check(rep, coarse, "h_hat_duality", c.hat_duality);
      check(rep, coarse, "inverse_commutes", c.inverse_commutes);
      check(rep, coarse, "P_coarse_direct_formula", c.p_matches_direct);
      check(rep, coarse, "h_hat_multinomial", c.h_hat_multinomial);
      check(rep, coarse, "h_hat_closed_form", c.h_hat_closed_form);
      check(rep, coarse, "single_type_rows_keep_mass", c.single_type_rows_stochastic);
      coarse["classes"] = c.labels;
      j["coarse"] = std::move(coarse);
    }
  }
  j["passed"] = rep.passed;
  return rep;
}

Json monte_carlo_json(const MonteCarloResult& r) {
  auto chain = [](const ChainEstimate& e) {
    return Json{{"mean", format_rational(e.mean)},
                {"mean_decimal", e.mean.get_d()},
                {"standard_error", e.standard_error},
                {"within_four_se", e.within_four_se},
                {"final_counts", e.final_counts}};
  };
  Json j;
  j["start"] = r.start;
  j["dual_start"] = r.dual_start;
  j["steps"] = r.steps;
  j["reps"] = r.reps;
  j["exact"] = format_rational(r.exact);
  j["exact_decimal"] = r.exact.get_d();
  j["forward"] = chain(r.forward);
  j["backward"] = chain(r.backward);
  return j;
}

std::string pretty_json(const Json& j) {
  std::ostringstream out;
  flatten(j, "", out);
  return out.str();
}

}  // namespace mdual::cli
