#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "riskgraph/common.hpp"

namespace riskgraph::datagen {

struct DatasetConfig {
  uint64_t n_transactions = 10000;
  int32_t n_days = 30;
  double fraud_ratio = 0.025;
  uint32_t n_fraud_rings = 8;
  uint32_t ring_size = 8;
  // Pool size per entity type, indexed by EntityType. Fraud rings draw their
  // shared device / payment token keys from a reserved range above the pool.
  std::array<uint64_t, kNumEntityTypes> entity_pool_sizes = {4000, 5000, 3000, 6000,
                                                             5000, 6000, 8000};
  uint32_t feature_dim = 16;
  double feature_noise = 1.0;
  uint64_t seed = 1;
};

// Seeded synthetic transaction stream: class-conditional Gaussian mixtures
// with overlapping means, shared entities, and fraud rings concentrated on
// DeviceId + PaymentToken keys. Output is sorted by day; txn ids are assigned
// in that order. The same config always yields the same records.
std::vector<TransactionRecord> generate(const DatasetConfig& config);

struct TimeSplit {
  std::vector<TransactionRecord> train;
  std::vector<TransactionRecord> val;
  std::vector<TransactionRecord> test;
};

// Last (1 - train_frac) of the records by timestamp become the test set; the
// validation set is a seeded random draw of val_frac_of_train from the rest.
// Requires records sorted by day and at least 10 of them.
TimeSplit split_by_time(std::span<const TransactionRecord> records, double train_frac,
                        double val_frac_of_train, uint64_t seed);

// Compact binary dataset container (header + length-prefixed little-endian
// records + checksum) and a line-oriented text form with a self-describing
// header line.
void write_dataset(const std::vector<TransactionRecord>& records, uint32_t feature_dim,
                   const std::string& path);
std::vector<TransactionRecord> read_dataset(const std::string& path, uint32_t* feature_dim_out);

void write_dataset_text(const std::vector<TransactionRecord>& records, uint32_t feature_dim,
                        const std::string& path);
std::vector<TransactionRecord> read_dataset_text(const std::string& path,
                                                 uint32_t* feature_dim_out);

} // namespace riskgraph::datagen
