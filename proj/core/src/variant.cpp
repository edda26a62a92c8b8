#include "hnag/variant.hpp"

#include <array>
#include <stdexcept>
#include <utility>

namespace hnag {

namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 8> kNames = {{
    {Variant::kExplicit, "explicit"},
    {Variant::kExtraGradient, "extra_gradient"},
    {Variant::kSemiImplicit, "semi_implicit"},
    {Variant::kCompositeSplit, "composite_split"},
    {Variant::kCompositeAlt, "composite_alt"},
    {Variant::kGradientMapping, "gradient_mapping"},
    {Variant::kNagFlowA, "nag_flow_a"},
    {Variant::kNagFlowB, "nag_flow_b"},
}};

}  // namespace

std::string_view to_string(Variant variant) {
  for (const auto& [v, name] : kNames) {
    if (v == variant) return name;
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (const auto& [v, n] : kNames) {
    if (n == name) return v;
  }
  std::string known;
  for (const auto& [v, n] : kNames) {
    if (!known.empty()) known += ", ";
    known += n;
  }
  throw std::invalid_argument("unknown variant '" + std::string(name) + "' (expected one of " +
                              known + ")");
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> variants = [] {
    std::vector<Variant> out;
    for (const auto& [v, n] : kNames) out.push_back(v);
    return out;
  }();
  return variants;
}

bool is_composite_variant(Variant variant) {
  return variant == Variant::kCompositeSplit || variant == Variant::kCompositeAlt ||
         variant == Variant::kGradientMapping;
}

}  // namespace hnag
