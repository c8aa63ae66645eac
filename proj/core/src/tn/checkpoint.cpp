#include "mclosure/tn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mclosure::tn {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint blobs assume a little-endian host");

template <class T> void put(std::ofstream& o, T v) { o.write(reinterpret_cast<const char*>(&v), sizeof v); }
template <class T> T get(std::ifstream& i) {
  T v;
  if (!i.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("load_mps: truncated blob");
  return v;
}

}  // namespace

void save_mps(const MPS& psi, const std::filesystem::path& file) {
  std::ofstream o(file, std::ios::binary);
  if (!o) throw std::runtime_error("save_mps: cannot open " + file.string());
  o.write("MCKP", 4);
  put<std::uint32_t>(o, 1);
  put<std::uint32_t>(o, std::uint32_t(psi.size()));
  put<std::int32_t>(o, psi.center);
  put<double>(o, psi.log_coeff.real());
  put<double>(o, psi.log_coeff.imag());
  put<std::uint8_t>(o, psi.zero ? 1 : 0);
  for (const auto& A : psi.sites) {
    put<std::uint32_t>(o, A.Dl);
    put<std::uint32_t>(o, A.d);
    put<std::uint32_t>(o, A.Dr);
    o.write(reinterpret_cast<const char*>(A.data.data()), std::streamsize(A.data.size() * sizeof(cplx)));
  }
  if (!o) throw std::runtime_error("save_mps: write failed for " + file.string());
}

MPS load_mps(const std::filesystem::path& file) {
  std::ifstream i(file, std::ios::binary);
  if (!i) throw std::runtime_error("load_mps: cannot open " + file.string());
  char magic[4];
  if (!i.read(magic, 4) || std::memcmp(magic, "MCKP", 4) != 0) throw std::runtime_error("load_mps: bad magic");
  if (get<std::uint32_t>(i) != 1) throw std::runtime_error("load_mps: unsupported version");
  MPS psi;
  psi.sites.resize(get<std::uint32_t>(i));
  psi.center = get<std::int32_t>(i);
  double re = get<double>(i), im = get<double>(i);
  psi.log_coeff = {re, im};
  psi.zero = get<std::uint8_t>(i) != 0;
  for (auto& A : psi.sites) {
    int Dl = int(get<std::uint32_t>(i)), d = int(get<std::uint32_t>(i)), Dr = int(get<std::uint32_t>(i));
    A = SiteTensor(Dl, d, Dr);
    if (!i.read(reinterpret_cast<char*>(A.data.data()), std::streamsize(A.data.size() * sizeof(cplx))))
      throw std::runtime_error("load_mps: truncated tensor data");
  }
  return psi;
}

CheckpointStore::CheckpointStore(std::size_t budget, std::filesystem::path dir)
    : budget_(budget), dir_(std::move(dir)) {}

CheckpointStore::~CheckpointStore() {
  std::error_code ec;
  for (const auto& [k, inf] : info_)
    if (!inf.file.empty()) std::filesystem::remove(inf.file, ec);
  if (created_dir_) std::filesystem::remove(dir_, ec);
}

void CheckpointStore::put(int key, double time_fs, const MPS& psi) {
  std::lock_guard lk(mu_);
  if (auto old = memory_.find(key); old != memory_.end()) {
    resident_ -= old->second.bytes();
    memory_.erase(old);
  } else if (auto f = info_.find(key); f != info_.end() && !f->second.file.empty()) {
    std::error_code ec;
    std::filesystem::remove(f->second.file, ec);
  }
  CheckpointInfo inf{time_fs, psi.log_coeff.real(), psi.bond_dims(), {}};
  std::size_t b = psi.bytes();
  if (resident_ + b <= budget_) {
    memory_[key] = psi;
    resident_ += b;
  } else {
    if (!created_dir_) {
      std::filesystem::create_directories(dir_);
      created_dir_ = true;
    }
    auto f = dir_ / ("ckpt_" + std::to_string(key) + ".bin");
    save_mps(psi, f);
    inf.file = f.string();
  }
  info_[key] = inf;
}

MPS CheckpointStore::get(int key) const {
  std::string file;
  {
    std::lock_guard lk(mu_);
    auto it = memory_.find(key);
    if (it != memory_.end()) return it->second;
    auto jt = info_.find(key);
    if (jt == info_.end()) throw std::out_of_range("CheckpointStore: no checkpoint " + std::to_string(key));
    file = jt->second.file;
  }
  return load_mps(file);
}

bool CheckpointStore::contains(int key) const {
  std::lock_guard lk(mu_);
  return info_.count(key) > 0;
}

std::size_t CheckpointStore::spilled() const {
  std::size_t n = 0;
  for (const auto& [k, inf] : info_) n += !inf.file.empty();
  return n;
}

void CheckpointStore::write_manifest(const std::filesystem::path& file) const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [k, inf] : info_)
    j.push_back({{"key", k}, {"time_fs", inf.time_fs}, {"norm_log", inf.norm_log},
                 {"bond_dims", inf.bond_dims}, {"file", inf.file}});
  std::ofstream o(file);
  o << j.dump(2) << "\n";
}

}  // namespace mclosure::tn
