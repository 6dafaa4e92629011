#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace npkry {

/// Flat parameter vector with a named-slice layout. Slices partition the
/// vector exactly, in declaration order.
class ModelParams {
 public:
  struct Slice {
    std::string name;
    std::size_t offset = 0;
    std::size_t len = 0;
  };

  ModelParams() = default;

  /// Appends a zero-initialized slice and returns its index.
  std::size_t add_slice(std::string name, std::size_t len);

  std::size_t size() const { return theta_.size(); }
  std::span<double> flat() { return theta_; }
  std::span<const double> flat() const { return theta_; }
  std::vector<double>& vector() { return theta_; }
  const std::vector<double>& vector() const { return theta_; }

  const std::vector<Slice>& layout() const { return layout_; }
  std::span<double> slice(std::string_view name);
  std::span<const double> slice(std::string_view name) const;
  std::span<double> slice(std::size_t idx);
  std::span<const double> slice(std::size_t idx) const;

  /// Checkpoint: magic "NPKRY", u32 format version, length-prefixed
  /// architecture descriptor text, then the flat f64 vector
  /// little-endian. The layout is rebuilt from the descriptor by the
  /// caller; slice names/sizes are stored alongside for validation.
  void save(const std::filesystem::path& path,
            const std::string& descriptor_text) const;
  static std::pair<ModelParams, std::string> load(
      const std::filesystem::path& path);

 private:
  std::vector<double> theta_;
  std::vector<Slice> layout_;
};

}  // namespace npkry
