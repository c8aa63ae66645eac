#include "output.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include <unistd.h>

#include <boost/crc.hpp>

namespace mclosure::cli {

std::uint32_t crc32_of(const std::string& bytes) {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

std::uint32_t crc32_of_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  boost::crc_32_type crc;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    crc.process_bytes(buf, std::size_t(in.gcount()));
  }
  return crc.checksum();
}

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

Staging::Staging(std::filesystem::path out_dir) : out_(std::move(out_dir)) {
  if (out_.empty()) throw std::invalid_argument("output directory is empty");
  auto base = out_.lexically_normal();
  if (base.filename().empty()) base = base.parent_path();
  stage_ = base;
  stage_ += ".partial-" + std::to_string(::getpid());
  std::filesystem::remove_all(stage_);
  std::filesystem::create_directories(stage_);
}

Staging::~Staging() {
  if (!committed_) {
    std::error_code ec;
    std::filesystem::remove_all(stage_, ec);
  }
}

std::filesystem::path Staging::file(const std::string& name) {
  if (name == "manifest.json" || name.find('/') != std::string::npos)
    throw std::invalid_argument("invalid output name " + name);
  if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
  return stage_ / name;
}

void Staging::commit(nlohmann::json manifest) {
  auto outputs = nlohmann::json::array();
  auto names = files_;
  std::sort(names.begin(), names.end());
  for (const auto& n : names) {
    auto p = stage_ / n;
    if (!std::filesystem::exists(p)) throw std::runtime_error("declared output " + n + " was not written");
    outputs.push_back({{"file", n}, {"bytes", std::filesystem::file_size(p)}, {"crc32", hex32(crc32_of_file(p))}});
  }
  manifest["outputs"] = outputs;
  {
    std::ofstream o(stage_ / "manifest.json", std::ios::binary);
    if (!o) throw std::runtime_error("cannot write manifest");
    o << manifest.dump(2) << "\n";
  }
  std::filesystem::create_directories(out_);
  for (const auto& n : names) std::filesystem::rename(stage_ / n, out_ / n);
  std::filesystem::rename(stage_ / "manifest.json", out_ / "manifest.json");
  std::filesystem::remove_all(stage_);
  committed_ = true;
}

}  // namespace mclosure::cli
