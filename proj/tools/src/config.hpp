#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace aslap::cli {

/// Flat `section.key = value` settings. Every known key has a default;
/// unknown keys are rejected. Path-valued keys are resolved against the
/// directory of the file they were read from.
class Config {
 public:
  Config();

  static Config load(const std::filesystem::path& file);
  static Config parse(std::istream& in, const std::filesystem::path& base_dir, const std::string& source = "<config>");

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;

  double number(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  std::uint64_t seed(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<std::string> words(const std::string& key) const;
  /// Empty when the key is unset.
  std::filesystem::path path(const std::string& key) const;

  /// `key = value` lines in key order.
  void print(std::ostream& out) const;

  const std::filesystem::path& base_dir() const noexcept { return base_dir_; }

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_;
};

}  // namespace aslap::cli
