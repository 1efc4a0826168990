#include "mtcoref/manifest.hpp"

#include <chrono>
#include <ctime>

#include "json.hpp"
#include "mtcoref/corpus.hpp"
#include "mtcoref/text.hpp"

namespace mtcoref {

void RunManifest::digest_inputs(const std::vector<std::filesystem::path>& inputs) {
  for (const auto& p : inputs)
    if (!p.empty()) input_digests[p.string()] = text::sha256_hex(read_file(p));
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool_version"] = tool_version;
  j["subcommand"] = subcommand;
  j["config"] = config;
  j["input_digests"] = input_digests;
  j["timestamp"] = timestamp;
  return j.dump(2) + "\n";
}

void RunManifest::write(const std::filesystem::path& out_dir) const {
  write_file_atomic(out_dir / "manifest.json", to_json());
}

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace mtcoref
