#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "impactfrac/rr_models.hpp"

namespace impactfrac::cli {

inline constexpr std::string_view kVersion = "1.0.0";
inline constexpr std::string_view kOutputDirEnv = "IMPACTFRAC_OUTPUT_DIR";

enum ExitCode : int { kOk = 0, kUsage = 2, kNumerical = 3 };

/// Runs one invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------
// Input helpers (exposed for testing)
// ---------------------------------------------------------------------------

struct CsvData {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
  std::optional<Eigen::VectorXd> weights;
};

/// Header row of column names, then rows of decimals separated by commas.
/// A column named `weight` (any case) becomes the weight vector. Blank
/// lines and lines starting with `#` are skipped. Parsing ignores the
/// locale. Throws Error(InvalidArgument) naming the offending line.
CsvData read_exposure_csv(std::istream& in);
CsvData read_exposure_csv_file(const std::string& path);

/// Option tokens ("--key=value") from a config file holding either a JSON
/// object (a top-level "config" member is used when present) or `key =
/// value` lines. Array values expand to one token per element.
std::vector<std::string> read_config_tokens(const std::string& path);
std::vector<std::string> parse_config_text(std::string_view text);

/// zero | identity | scale:<a> | shift:<d>[,<d>...], each optionally followed
/// by "+clamp". A single shift offset is repeated over k components.
Counterfactual parse_counterfactual(std::string_view spec, Eigen::Index k = 1);

/// "a:b:step" (inclusive) or a comma list.
std::vector<double> parse_grid(std::string_view spec);

/// Comma-separated decimals.
std::vector<double> parse_list(std::string_view spec);

/// Strict locale-independent decimal parse of the whole string.
double parse_double(std::string_view text);

}  // namespace impactfrac::cli
