#include "riskgraph/common.hpp"

namespace riskgraph {

std::string_view entity_type_name(EntityType t) {
  return kEntityTypeNames.at(static_cast<size_t>(t));
}

EntityType entity_type_from_name(std::string_view name) {
  for (int i = 0; i < kNumEntityTypes; ++i) {
    if (kEntityTypeNames[static_cast<size_t>(i)] == name) return static_cast<EntityType>(i);
  }
  throw InputError("unknown entity type: " + std::string(name));
}

} // namespace riskgraph
