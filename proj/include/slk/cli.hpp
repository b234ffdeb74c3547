#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slk/affinity.hpp"
#include "slk/data_io.hpp"
#include "slk/optimizer.hpp"

namespace slk::cli {

enum class Command { Cluster, Fewshot, Eval, Trace, Synth };
enum class Algorithm { KMeans, KModes, SlkMeans, SlkMs };

Algorithm parse_algorithm(std::string_view name);
std::string to_string(Algorithm algo);
std::string to_string(Command command);
PrototypeRule rule_of(Algorithm algo);

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitWarning = 3;

struct RunConfig {
  Command command = Command::Cluster;
  Algorithm algorithm = Algorithm::SlkMs;

  std::filesystem::path features;
  std::filesystem::path labels;
  std::filesystem::path predictions;
  std::filesystem::path episodes;
  std::filesystem::path base_mean;
  std::filesystem::path out_dir = ".";
  std::string format = "auto";  // auto | csv | slkbin
  bool csv_header = false;

  std::size_t k = 0;
  std::optional<double> lambda;  // resolved by resolve()
  std::optional<std::size_t> rho;
  double delta = 0.0;
  bool delta_auto = false;
  std::uint64_t seed = 0;
  int threads = 0;
  double inner_tol = 1e-6;
  double outer_tol = 1e-6;
  std::size_t inner_max = 100;
  std::size_t outer_max = 100;
  SymmetrizeMode symmetrize = SymmetrizeMode::Max;
  bool strict = false;
  bool write_soft = false;
  bool cl2 = false;
  bool bias = false;

  // synth
  std::string synth_kind = "fewshot";  // fewshot | blobs
  std::size_t synth_count = 200;       // episodes, or points per blob
  std::size_t way = 5;
  std::size_t shot = 1;
  std::size_t query = 15;
  std::size_t dim = 10;
  double separation = 6.0;

  // Fills defaults (lambda, rho) and rejects inconsistent settings with
  // ErrorCode::Config before any data is touched.
  void resolve();
  SolverConfig solver_config() const;
};

std::string config_json(const RunConfig& config);

int cmd_cluster(const RunConfig& config, std::ostream& out);
int cmd_trace(const RunConfig& config, std::ostream& out);
int cmd_fewshot(const RunConfig& config, std::ostream& out);
int cmd_eval(const RunConfig& config, std::ostream& out);
int cmd_synth(const RunConfig& config, std::ostream& out);

// Parses argv-style arguments (args[0] is the program name), dispatches,
// and maps failures to exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace slk::cli
