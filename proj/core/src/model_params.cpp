#include "npkry/model_params.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "npkry/error.hpp"

namespace npkry {

namespace {
constexpr char kMagic[5] = {'N', 'P', 'K', 'R', 'Y'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::size_t ModelParams::add_slice(std::string name, std::size_t len) {
  check(len > 0, "add_slice: empty slice " + name);
  layout_.push_back({std::move(name), theta_.size(), len});
  theta_.resize(theta_.size() + len, 0.0);
  return layout_.size() - 1;
}

std::span<double> ModelParams::slice(std::string_view name) {
  for (const auto& s : layout_)
    if (s.name == name) return {theta_.data() + s.offset, s.len};
  throw Error("unknown parameter slice: " + std::string(name));
}

std::span<const double> ModelParams::slice(std::string_view name) const {
  for (const auto& s : layout_)
    if (s.name == name) return {theta_.data() + s.offset, s.len};
  throw Error("unknown parameter slice: " + std::string(name));
}

std::span<double> ModelParams::slice(std::size_t idx) {
  check(idx < layout_.size(), "slice index out of range");
  const auto& s = layout_[idx];
  return {theta_.data() + s.offset, s.len};
}

std::span<const double> ModelParams::slice(std::size_t idx) const {
  check(idx < layout_.size(), "slice index out of range");
  const auto& s = layout_[idx];
  return {theta_.data() + s.offset, s.len};
}

void ModelParams::save(const std::filesystem::path& path,
                       const std::string& descriptor_text) const {
  std::ofstream out(path, std::ios::binary);
  check(out.good(), "cannot open for writing: " + path.string());
  out.write(kMagic, 5);
  const std::uint32_t version = kVersion;
  out.write(reinterpret_cast<const char*>(&version), 4);
  std::string header = descriptor_text;
  header += "\n[layout]\n";
  for (const auto& s : layout_)
    header += s.name + " " + std::to_string(s.len) + "\n";
  const std::uint64_t hlen = header.size();
  out.write(reinterpret_cast<const char*>(&hlen), 8);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  const std::uint64_t n = theta_.size();
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(theta_.data()),
            static_cast<std::streamsize>(8 * theta_.size()));
  check(out.good(), "write failed: " + path.string());
}

std::pair<ModelParams, std::string> ModelParams::load(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), "cannot open: " + path.string());
  char magic[5];
  in.read(magic, 5);
  check(static_cast<bool>(in) && std::memcmp(magic, kMagic, 5) == 0,
        "not a checkpoint file: " + path.string());
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  check(version == kVersion, "unsupported checkpoint version");
  std::uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), 8);
  std::string header(hlen, '\0');
  in.read(header.data(), static_cast<std::streamsize>(hlen));
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), 8);
  check(static_cast<bool>(in), "truncated checkpoint: " + path.string());

  ModelParams params;
  // restore layout from the [layout] section
  const auto mark = header.find("\n[layout]\n");
  check(mark != std::string::npos, "checkpoint missing layout section");
  std::string descriptor = header.substr(0, mark);
  std::string layout_text = header.substr(mark + 10);
  std::size_t pos = 0;
  while (pos < layout_text.size()) {
    const auto eol = layout_text.find('\n', pos);
    if (eol == std::string::npos) break;
    const std::string line = layout_text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    const auto sp = line.rfind(' ');
    check(sp != std::string::npos, "bad layout line: " + line);
    params.add_slice(line.substr(0, sp),
                     std::stoull(line.substr(sp + 1)));
  }
  check(params.size() == n, "checkpoint layout/parameter count mismatch");
  in.read(reinterpret_cast<char*>(params.theta_.data()),
          static_cast<std::streamsize>(8 * n));
  check(static_cast<bool>(in), "truncated checkpoint: " + path.string());
  return {std::move(params), std::move(descriptor)};
}

}  // namespace npkry
