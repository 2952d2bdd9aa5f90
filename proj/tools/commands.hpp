#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ebv/io.hpp"

namespace ebv::cli {

struct CommandOptions {
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Everything a command produces; nothing touches the disk until emit().
struct Outputs {
  std::optional<Table> results;
  json document = json::object();
  /// Additional CSV tables, written next to results.csv.
  std::vector<std::pair<std::string, Table>> tables;
  /// plots/<name>.svg
  std::vector<std::pair<std::string, std::string>> plots;
};

Outputs cmd_hbar(const RunConfig& rc, const CommandOptions& opt);
Outputs cmd_alpha(const RunConfig& rc, const CommandOptions& opt);
Outputs cmd_level_curve(const RunConfig& rc, const CommandOptions& opt);
Outputs cmd_flat_pieces(const RunConfig& rc, const CommandOptions& opt);
Outputs cmd_perturb(const RunConfig& rc, const CommandOptions& opt);
Outputs cmd_front(const RunConfig& rc, const CommandOptions& opt);
Outputs cmd_experiment_weak_flow(const RunConfig& rc, const CommandOptions& opt);
Outputs cmd_experiment_strong_flow(const RunConfig& rc, const CommandOptions& opt);
Outputs cmd_experiment_shear(const RunConfig& rc, const CommandOptions& opt);
Outputs cmd_experiment_cellular(const RunConfig& rc, const CommandOptions& opt);

/// results.csv, results.json, plots/*.svg under `dir`, per the output block.
void emit(const Outputs& out, const OutputSpec& spec, const std::filesystem::path& dir);

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNonConvergence = 3;

/// Full command line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace ebv::cli
