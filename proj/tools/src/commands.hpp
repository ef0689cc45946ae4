#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace aslap::cli {

/// Files a command has started writing. Unless commit() is called, the
/// destructor deletes them so a failed run leaves no partial outputs.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir);
  ~OutputSet();
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;

  /// Path of `name` under the output directory, registered for cleanup.
  std::filesystem::path claim(const std::string& name);
  void commit() noexcept { committed_ = true; }

  const std::filesystem::path& dir() const noexcept { return dir_; }
  const std::vector<std::filesystem::path>& files() const noexcept { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> files_;
  bool committed_ = false;
};

void cmd_ingest(const Config& config, OutputSet& out);
void cmd_train(const Config& config, OutputSet& out);
void cmd_simulate(const Config& config, OutputSet& out);
void cmd_benchmark(const Config& config, OutputSet& out, unsigned jobs);

/// Applies ASLAP_LOG (error, info or debug; info when unset).
void configure_logging(const char* level);

/// Full command-line entry point. Returns the process exit code: 0 on
/// success, 1 when a run fails, 2 for usage and configuration errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aslap::cli
