#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace riskgraph {

// The seven entity types that can link transactions.
enum class EntityType : uint8_t {
  ShipAddr = 0,
  Email = 1,
  Ip = 2,
  DeviceId = 3,
  Phone = 4,
  PaymentToken = 5,
  BuyerAccount = 6,
};

constexpr int kNumEntityTypes = 7;

constexpr std::array<std::string_view, kNumEntityTypes> kEntityTypeNames = {
    "ship_addr", "email", "ip", "device_id", "phone", "payment_token", "buyer_account"};

std::string_view entity_type_name(EntityType t);
EntityType entity_type_from_name(std::string_view name);

struct EntityKey {
  EntityType type;
  uint64_t key;

  friend auto operator<=>(const EntityKey&, const EntityKey&) = default;
};

// One checkout event. Entities carry at most one key per type and are kept
// sorted by type.
struct TransactionRecord {
  uint64_t txn_id = 0;
  int32_t day = 0;  // day index >= 0
  int8_t label = 0; // 0 legit, 1 fraud
  std::vector<float> features;
  std::vector<EntityKey> entities;
};

// Error taxonomy shared by all modules. The CLI maps these to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SplitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace riskgraph
