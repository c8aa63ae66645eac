// output.hpp - staged output directory and run manifest
//
// Files are written to a sibling "<out>.partial-<pid>" directory and only
// moved into <out> once the task has finished, so a failed run leaves no
// partial results behind.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mclosure::cli {

std::uint32_t crc32_of_file(const std::filesystem::path& file);
std::uint32_t crc32_of(const std::string& bytes);
std::string hex32(std::uint32_t v);

class Staging {
 public:
  explicit Staging(std::filesystem::path out_dir);
  ~Staging();
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;

  // path of an output file inside the staging area; the name is recorded
  std::filesystem::path file(const std::string& name);
  const std::vector<std::string>& files() const { return files_; }

  // adds {"outputs": [{file, bytes, crc32}]} to the manifest, writes
  // manifest.json and moves everything into the output directory
  void commit(nlohmann::json manifest);

 private:
  std::filesystem::path out_, stage_;
  std::vector<std::string> files_;
  bool committed_ = false;
};

}  // namespace mclosure::cli
