#include "riskgraph/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <random>

#include <json.hpp>

#include "riskgraph/binio.hpp"

namespace riskgraph::datagen {

namespace {

constexpr uint32_t kDatasetMagic = 0x53444752; // "RGDS"
constexpr uint16_t kDatasetVersion = 1;

// Mixture geometry. Fraud means sit a fixed offset away from the legit means
// along the leading signal dimensions, close enough that a tabular model
// stays well below AP 1.0 while neighbor aggregation can still separate.
constexpr int kMixtureComponents = 3;
constexpr double kClassOffset = 1.35;
constexpr double kComponentSpread = 0.6;

struct MixtureParams {
  // means[label][component] -> feature_dim vector
  std::vector<std::vector<std::vector<double>>> means;
};

MixtureParams draw_mixture(std::mt19937_64& rng, uint32_t feature_dim) {
  MixtureParams mp;
  std::normal_distribution<double> comp(0.0, kComponentSpread);
  int signal_dims = std::min<uint32_t>(feature_dim, 6);
  double shift = kClassOffset / std::sqrt(static_cast<double>(signal_dims));
  mp.means.assign(2, std::vector<std::vector<double>>(
                         kMixtureComponents, std::vector<double>(feature_dim, 0.0)));
  for (int c = 0; c < kMixtureComponents; ++c) {
    for (uint32_t d = 0; d < feature_dim; ++d) {
      double base = comp(rng);
      mp.means[0][c][d] = base;
      mp.means[1][c][d] = base + (d < static_cast<uint32_t>(signal_dims) ? shift : 0.0);
    }
  }
  return mp;
}

void validate(const DatasetConfig& c) {
  if (c.fraud_ratio <= 0.0 || c.fraud_ratio >= 1.0)
    throw ConfigError("fraud_ratio must be in (0,1)");
  if (c.n_days < 1) throw ConfigError("n_days must be >= 1");
  if (c.feature_dim == 0) throw ConfigError("feature_dim must be >= 1");
  if (c.feature_noise < 0.0) throw ConfigError("feature_noise must be >= 0");
  for (uint64_t p : c.entity_pool_sizes) {
    if (p == 0) throw ConfigError("entity pool sizes must be > 0");
  }
  if (c.n_fraud_rings > 0 && c.ring_size < 2)
    throw ConfigError("ring_size must be >= 2 when rings are enabled");
}

struct PendingRecord {
  int32_t day;
  int8_t label;
  uint64_t order; // generation order, tie-break for the final sort
  std::vector<float> features;
  std::vector<EntityKey> entities;
};

std::vector<float> draw_features(std::mt19937_64& rng, const MixtureParams& mp, int label,
                                 double noise, uint32_t feature_dim) {
  std::uniform_int_distribution<int> comp_pick(0, kMixtureComponents - 1);
  std::normal_distribution<double> n01(0.0, 1.0);
  int c = comp_pick(rng);
  std::vector<float> x(feature_dim);
  for (uint32_t d = 0; d < feature_dim; ++d) {
    x[d] = static_cast<float>(mp.means[label][c][d] + noise * n01(rng));
  }
  return x;
}

// BuyerAccount is always attached; the remaining types show up with
// probability 0.8 each. Ring members additionally force their shared
// DeviceId and PaymentToken keys.
std::vector<EntityKey> draw_entities(std::mt19937_64& rng, const DatasetConfig& cfg,
                                     bool ring_member, uint64_t ring_device,
                                     uint64_t ring_token) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<EntityKey> out;
  for (int t = 0; t < kNumEntityTypes; ++t) {
    auto type = static_cast<EntityType>(t);
    if (ring_member && type == EntityType::DeviceId) {
      out.push_back({type, ring_device});
      continue;
    }
    if (ring_member && type == EntityType::PaymentToken) {
      out.push_back({type, ring_token});
      continue;
    }
    bool present = (type == EntityType::BuyerAccount) || u01(rng) < 0.8;
    if (!present) continue;
    std::uniform_int_distribution<uint64_t> pick(0, cfg.entity_pool_sizes[t] - 1);
    out.push_back({type, pick(rng)});
  }
  return out;
}

} // namespace

std::vector<TransactionRecord> generate(const DatasetConfig& cfg) {
  validate(cfg);
  if (cfg.n_transactions == 0) return {};

  std::mt19937_64 rng(cfg.seed);
  MixtureParams mp = draw_mixture(rng, cfg.feature_dim);

  uint64_t n = cfg.n_transactions;
  uint64_t n_fraud = std::min<uint64_t>(
      n, static_cast<uint64_t>(std::llround(static_cast<double>(n) * cfg.fraud_ratio)));
  uint64_t ring_total =
      std::min<uint64_t>(n_fraud, static_cast<uint64_t>(cfg.n_fraud_rings) * cfg.ring_size);
  uint64_t n_lone_fraud = n_fraud - ring_total;
  uint64_t n_legit = n - n_fraud;

  std::vector<PendingRecord> pending;
  pending.reserve(n);
  uint64_t order = 0;

  std::uniform_int_distribution<int32_t> day_pick(0, cfg.n_days - 1);
  int32_t ring_span = std::min<int32_t>(cfg.n_days, 10);

  // Fraud rings: members spread over a short day window so that later
  // members see earlier ones as historical references.
  uint64_t remaining_ring = ring_total;
  for (uint32_t r = 0; r < cfg.n_fraud_rings && remaining_ring > 0; ++r) {
    uint64_t members = std::min<uint64_t>(remaining_ring, cfg.ring_size);
    remaining_ring -= members;
    uint64_t ring_device = cfg.entity_pool_sizes[static_cast<int>(EntityType::DeviceId)] + r;
    uint64_t ring_token = cfg.entity_pool_sizes[static_cast<int>(EntityType::PaymentToken)] + r;
    std::uniform_int_distribution<int32_t> start_pick(0, std::max(0, cfg.n_days - ring_span));
    int32_t start = start_pick(rng);
    std::uniform_int_distribution<int32_t> offset_pick(0, ring_span - 1);
    for (uint64_t m = 0; m < members; ++m) {
      PendingRecord rec;
      rec.day = std::min(start + offset_pick(rng), cfg.n_days - 1);
      rec.label = 1;
      rec.order = order++;
      rec.features = draw_features(rng, mp, 1, cfg.feature_noise, cfg.feature_dim);
      rec.entities = draw_entities(rng, cfg, true, ring_device, ring_token);
      pending.push_back(std::move(rec));
    }
  }

  for (uint64_t i = 0; i < n_lone_fraud; ++i) {
    PendingRecord rec;
    rec.day = day_pick(rng);
    rec.label = 1;
    rec.order = order++;
    rec.features = draw_features(rng, mp, 1, cfg.feature_noise, cfg.feature_dim);
    rec.entities = draw_entities(rng, cfg, false, 0, 0);
    pending.push_back(std::move(rec));
  }

  for (uint64_t i = 0; i < n_legit; ++i) {
    PendingRecord rec;
    rec.day = day_pick(rng);
    rec.label = 0;
    rec.order = order++;
    rec.features = draw_features(rng, mp, 0, cfg.feature_noise, cfg.feature_dim);
    rec.entities = draw_entities(rng, cfg, false, 0, 0);
    pending.push_back(std::move(rec));
  }

  std::sort(pending.begin(), pending.end(), [](const PendingRecord& a, const PendingRecord& b) {
    if (a.day != b.day) return a.day < b.day;
    return a.order < b.order;
  });

  std::vector<TransactionRecord> records;
  records.reserve(n);
  for (uint64_t i = 0; i < pending.size(); ++i) {
    TransactionRecord rec;
    rec.txn_id = i;
    rec.day = pending[i].day;
    rec.label = pending[i].label;
    rec.features = std::move(pending[i].features);
    rec.entities = std::move(pending[i].entities);
    records.push_back(std::move(rec));
  }
  return records;
}

TimeSplit split_by_time(std::span<const TransactionRecord> records, double train_frac,
                        double val_frac_of_train, uint64_t seed) {
  if (records.size() < 10) throw SplitError("need at least 10 records to split");
  if (train_frac <= 0.0 || train_frac > 1.0) throw SplitError("train_frac out of range");
  if (val_frac_of_train < 0.0 || val_frac_of_train >= 1.0)
    throw SplitError("val_frac_of_train out of range");
  for (size_t i = 1; i < records.size(); ++i) {
    if (records[i].day < records[i - 1].day) throw SplitError("records not sorted by timestamp");
  }

  size_t n = records.size();
  size_t n_train_pool = static_cast<size_t>(std::floor(train_frac * static_cast<double>(n)));
  n_train_pool = std::min(n_train_pool, n);

  TimeSplit split;
  for (size_t i = n_train_pool; i < n; ++i) split.test.push_back(records[i]);

  size_t n_val = static_cast<size_t>(
      std::floor(val_frac_of_train * static_cast<double>(n_train_pool)));
  std::vector<size_t> idx(n_train_pool);
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<bool> is_val(n_train_pool, false);
  for (size_t i = 0; i < n_val; ++i) is_val[idx[i]] = true;
  for (size_t i = 0; i < n_train_pool; ++i) {
    (is_val[i] ? split.val : split.train).push_back(records[i]);
  }
  return split;
}

void write_dataset(const std::vector<TransactionRecord>& records, uint32_t feature_dim,
                   const std::string& path) {
  binio::BinWriter w;
  w.put<uint32_t>(kDatasetMagic);
  w.put<uint16_t>(kDatasetVersion);
  w.put<uint32_t>(feature_dim);
  w.put<uint64_t>(records.size());
  for (const auto& r : records) {
    if (r.features.size() != feature_dim) throw InputError("record feature_dim mismatch");
    w.put<uint64_t>(r.txn_id);
    w.put<int32_t>(r.day);
    w.put<int8_t>(r.label);
    w.put<uint8_t>(static_cast<uint8_t>(r.entities.size()));
    for (const auto& e : r.entities) {
      w.put<uint8_t>(static_cast<uint8_t>(e.type));
      w.put<uint64_t>(e.key);
    }
    w.put<uint32_t>(static_cast<uint32_t>(r.features.size()));
    w.put_span(std::span<const float>(r.features));
  }
  w.write_file(path);
}

std::vector<TransactionRecord> read_dataset(const std::string& path, uint32_t* feature_dim_out) {
  binio::BinReader rd(path);
  if (rd.get<uint32_t>() != kDatasetMagic) throw IoError("not a dataset file: " + path);
  if (rd.get<uint16_t>() != kDatasetVersion) throw IoError("unsupported dataset version");
  uint32_t feature_dim = rd.get<uint32_t>();
  uint64_t n = rd.get<uint64_t>();
  std::vector<TransactionRecord> records;
  records.reserve(n);
  for (uint64_t i = 0; i < n; ++i) {
    TransactionRecord r;
    r.txn_id = rd.get<uint64_t>();
    r.day = rd.get<int32_t>();
    r.label = rd.get<int8_t>();
    uint8_t ne = rd.get<uint8_t>();
    r.entities.reserve(ne);
    for (uint8_t e = 0; e < ne; ++e) {
      EntityKey k;
      k.type = static_cast<EntityType>(rd.get<uint8_t>());
      k.key = rd.get<uint64_t>();
      r.entities.push_back(k);
    }
    uint32_t fl = rd.get<uint32_t>();
    r.features = rd.get_vec<float>(fl);
    records.push_back(std::move(r));
  }
  if (feature_dim_out) *feature_dim_out = feature_dim;
  return records;
}

void write_dataset_text(const std::vector<TransactionRecord>& records, uint32_t feature_dim,
                        const std::string& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> f(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!f) throw IoError("cannot open file for write: " + path);
  nlohmann::json header;
  header["format"] = "riskgraph-dataset";
  header["version"] = kDatasetVersion;
  header["feature_dim"] = feature_dim;
  std::vector<std::string> type_names;
  for (auto n : kEntityTypeNames) type_names.emplace_back(n);
  header["entity_types"] = type_names;
  header["n_records"] = records.size();
  std::string line = header.dump();
  std::fprintf(f.get(), "%s\n", line.c_str());
  for (const auto& r : records) {
    nlohmann::json j;
    j["txn_id"] = r.txn_id;
    j["day"] = r.day;
    j["label"] = static_cast<int>(r.label);
    nlohmann::json ents = nlohmann::json::array();
    for (const auto& e : r.entities) {
      ents.push_back({std::string(entity_type_name(e.type)), e.key});
    }
    j["entities"] = ents;
    j["features"] = r.features;
    line = j.dump();
    std::fprintf(f.get(), "%s\n", line.c_str());
  }
}

std::vector<TransactionRecord> read_dataset_text(const std::string& path,
                                                 uint32_t* feature_dim_out) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty dataset file: " + path);
  nlohmann::json header = nlohmann::json::parse(line);
  if (header.value("format", "") != "riskgraph-dataset")
    throw IoError("not a text dataset file: " + path);
  uint32_t feature_dim = header.at("feature_dim").get<uint32_t>();
  std::vector<TransactionRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    TransactionRecord r;
    r.txn_id = j.at("txn_id").get<uint64_t>();
    r.day = j.at("day").get<int32_t>();
    r.label = static_cast<int8_t>(j.at("label").get<int>());
    for (const auto& e : j.at("entities")) {
      EntityKey k;
      k.type = entity_type_from_name(e.at(0).get<std::string>());
      k.key = e.at(1).get<uint64_t>();
      r.entities.push_back(k);
    }
    r.features = j.at("features").get<std::vector<float>>();
    if (r.features.size() != feature_dim) throw IoError("record feature_dim mismatch");
    records.push_back(std::move(r));
  }
  if (feature_dim_out) *feature_dim_out = feature_dim;
  return records;
}

} // namespace riskgraph::datagen
