#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace relugeom {

/// Outcome of one oracle suite. `report` lists every property with its
/// check count, pass count, worst residual and tolerance; `counterexample`
/// is the first failing case (null when everything passed).
struct VerifyOutcome {
  bool passed = true;
  nlohmann::json report;
  nlohmann::json counterexample;
};

const std::vector<std::string>& verify_suites();

/// Deterministic in `seed`. Throws GeometryError(Schema) for unknown suites.
VerifyOutcome run_verify(const std::string& suite, std::uint64_t seed);

}  // namespace relugeom
