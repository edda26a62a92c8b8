#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hnag {

/// Discrete schemes. nag_flow_a and nag_flow_b are the NAG-flow schemes
/// rewritten as explicit H-NAG steps; they double as equivalence oracles.
enum class Variant {
  kExplicit,
  kExtraGradient,
  kSemiImplicit,
  kCompositeSplit,
  kCompositeAlt,
  kGradientMapping,
  kNagFlowA,
  kNagFlowB,
};

std::string_view to_string(Variant variant);
/// Accepts the snake_case names printed by to_string; throws std::invalid_argument otherwise.
Variant parse_variant(std::string_view name);
const std::vector<Variant>& all_variants();

/// Variants that need a CompositeObjective (h + g).
bool is_composite_variant(Variant variant);

}  // namespace hnag
