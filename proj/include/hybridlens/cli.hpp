#pragma once
// Command-line front end. Exit codes: 0 pass, 1 domain failure,
// 2 usage or configuration error.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "hybridlens/config.hpp"

namespace hybridlens::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<int> grid;
  std::optional<double> tol;
  bool force{false};
  std::optional<std::string> gradient_mode;
};

/// Applies command-line overrides to a parsed config (ConfigError on misuse).
DesignConfig apply(DesignConfig config, const Overrides& o);

int cmd_check(const DesignConfig& c, std::ostream& log);
int cmd_design_imaging(const DesignConfig& c, bool force, std::ostream& log);
int cmd_design_farfield(const DesignConfig& c, bool force, std::ostream& log);
int cmd_trace(const DesignConfig& c, std::ostream& log);
int cmd_plot2d(const DesignConfig& c, std::ostream& log);
int cmd_lemma_check(const DesignConfig& c, std::ostream& log);

/// Parses argv, runs one subcommand and maps exceptions onto exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hybridlens::cli
