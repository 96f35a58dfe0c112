#include "manifest.hpp"

#include "ledgerlof/error.hpp"
#include "ledgerlof/tsv.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

namespace ledgerlof::cli {

std::string file_sha256(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw Error("io", "cannot read " + path.string()); }
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) { throw Error("io", "SHA-256 unavailable"); }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

void RunManifest::write(std::filesystem::path const &path) const
{
  nlohmann::ordered_json j;
  j["command_line"] = command_line;
  j["subcommand"] = subcommand;
  j["config"] = config;
  if (!seed.empty()) { j["seed"] = seed; }
  auto files = [](std::vector<std::filesystem::path> const &paths) {
    auto arr = nlohmann::ordered_json::array();
    for (auto const &p : paths) { arr.push_back({{"path", p.string()}, {"sha256", file_sha256(p)}}); }
    return arr;
  };
  j["inputs"] = files(inputs);
  j["outputs"] = files(outputs);
  j["metadata"] = metadata;
  j["timings"] = {{"wall_seconds", seconds}};
  tsv::write_atomically(path, [&](std::ostream &out) { out << j.dump(2) << '\n'; });
}

std::filesystem::path manifest_path_for(std::filesystem::path const &primary_output)
{
  auto p = primary_output;
  p += ".manifest.json";
  return p;
}

} // namespace ledgerlof::cli
