#include "ctes/policies.hpp"

#include <string>

#include "ctes/errors.hpp"

namespace ctes {

std::unique_ptr<Policy> make_baseline_policy(std::string_view name) {
  if (name == "greedy") return std::make_unique<GreedyPolicy>();
  if (name == "tfp") return std::make_unique<TfpPolicy>();
  if (name == "sdpp") return std::make_unique<SdppPolicy>();
  throw ParameterError("unknown baseline policy '" + std::string(name) +
                       "' (expected greedy, tfp, or sdpp)");
}

}  // namespace ctes
