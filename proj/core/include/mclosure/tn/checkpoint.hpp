// checkpoint.hpp - MPS snapshots kept in memory up to a budget, spilled to disk beyond it
//
// Blob layout (little-endian): "MCKP", u32 version = 1, u32 sites, i32 centre,
// f64 re/im of the log-prefactor, u8 zero flag, then per site u32 Dl, d, Dr
// followed by Dl*d*Dr pairs of f64 (re, im) in column-major (l, s, r) order.
#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "mclosure/tn/mps.hpp"

namespace mclosure::tn {

void save_mps(const MPS& psi, const std::filesystem::path& file);
MPS load_mps(const std::filesystem::path& file);

struct CheckpointInfo {
  double time_fs = 0.0;
  double norm_log = 0.0;
  std::vector<int> bond_dims;
  std::string file;  // empty while resident in memory
};

class CheckpointStore {
 public:
  // budget in bytes; spill_dir is created on first spill
  CheckpointStore(std::size_t memory_budget, std::filesystem::path spill_dir);
  ~CheckpointStore();
  CheckpointStore(const CheckpointStore&) = delete;
  CheckpointStore& operator=(const CheckpointStore&) = delete;

  void put(int key, double time_fs, const MPS& psi);
  MPS get(int key) const;
  bool contains(int key) const;
  std::size_t size() const { return info_.size(); }
  std::size_t resident_bytes() const { return resident_; }
  std::size_t spilled() const;
  const std::map<int, CheckpointInfo>& info() const { return info_; }
  // JSON list of {time_fs, norm_log, bond_dims, file}
  void write_manifest(const std::filesystem::path& file) const;

 private:
  std::size_t budget_;
  std::filesystem::path dir_;
  std::size_t resident_ = 0;
  std::map<int, MPS> memory_;
  std::map<int, CheckpointInfo> info_;
  bool created_dir_ = false;
  mutable std::mutex mu_;
};

}  // namespace mclosure::tn
