#include "adfuse/sketch.hpp"

namespace adfuse {

std::string_view to_string(FusionScheme scheme) {
  switch (scheme) {
    case FusionScheme::concat:
      return "concat";
    case FusionScheme::average:
      return "average";
    case FusionScheme::mcb:
      return "mcb";
  }
  return "unknown";
}

FusionScheme parse_fusion_scheme(std::string_view name) {
  if (name == "concat") return FusionScheme::concat;
  if (name == "average") return FusionScheme::average;
  if (name == "mcb") return FusionScheme::mcb;
  throw std::invalid_argument("unknown fusion scheme '" + std::string(name) +
                              "' (expected concat, average or mcb)");
}

void FusionSpec::validate() const {
  if (scheme != FusionScheme::mcb) return;
  if (sketch_dim == 0) throw std::invalid_argument("mcb requires sketch dim >= 1");
  if (seed_a == seed_b) throw std::invalid_argument("mcb requires two distinct seeds");
}

std::size_t FusionSpec::output_dim(std::size_t dim_a, std::size_t dim_b) const {
  switch (scheme) {
    case FusionScheme::concat:
      return dim_a + dim_b;
    case FusionScheme::average:
      if (dim_a != dim_b) throw std::invalid_argument("average requires equal dims");
      return dim_a;
    case FusionScheme::mcb:
      break;
  }
  return sketch_dim;
}

Fuser::Fuser(const FusionSpec& spec, std::size_t dim_a, std::size_t dim_b)
    : spec_(spec), dim_a_(dim_a), dim_b_(dim_b) {
  spec_.validate();
  output_dim_ = spec_.output_dim(dim_a, dim_b);
  if (spec_.scheme == FusionScheme::mcb) {
    params_a_ = make_sketch_params(dim_a, spec_.sketch_dim, spec_.seed_a);
    params_b_ = make_sketch_params(dim_b, spec_.sketch_dim, spec_.seed_b);
  }
}

}  // namespace adfuse
