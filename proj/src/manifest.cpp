#include "entrywise/manifest.hpp"

#include "entrywise/csv_io.hpp"
#include "entrywise/errors.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iterator>
#include <memory>

namespace entrywise {

std::string version() { return ENTRYWISE_VERSION; }

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error(ErrorCode::NumericalFailure, "SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(data);
}

void RunManifest::add_output(const std::filesystem::path& dir, const std::string& name) {
  outputs.push_back({name, sha256_file(dir / name)});
}

Json RunManifest::to_json() const {
  Json j;
  j["command"] = command;
  j["version"] = version();
  j["config"] = config;
  j["seeds"] = seeds;
  for (const auto& [key, value] : details.items()) j[key] = value;
  Json files = Json::array();
  for (const auto& o : outputs) files.push_back({{"file", o.file}, {"sha256", o.sha256}});
  j["outputs"] = std::move(files);
  j["timings"] = timings;
  return j;
}

void RunManifest::write(const std::filesystem::path& path) const {
  write_text_file(path, dump_json(to_json()));
}

Json without_timings(Json manifest) {
  manifest.erase("timings");
  return manifest;
}

}  // namespace entrywise
