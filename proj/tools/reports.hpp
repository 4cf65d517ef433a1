#pragma once

#include <json.hpp>
#include <string>

#include "mdual/cannings.hpp"
#include "mdual/duality.hpp"
#include "mdual/io.hpp"

namespace mdual::cli {

using Json = nlohmann::ordered_json;

Json matrix_json(const LabeledMatrix& m);
Json positivity_json(const PositivityReport& r, const FinitePoset& poset);
Json strong_json(const StrongConditionReport& r, const FinitePoset& poset);

/// Every boolean is an exact verification outcome; `passed` is their
/// conjunction.
struct CanningsReport {
  Json json;
  bool passed = true;
};

CanningsReport cannings_report(const OffspringLaw& law, const std::string& model, int types);
Json monte_carlo_json(const MonteCarloResult& r);

/// Flattens a JSON report into "key: value" lines.
std::string pretty_json(const Json& j);

}  // namespace mdual::cli
