#pragma once

#include "missreg/masked_matrix.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace missreg {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvOptions {
  std::string na_token = "NA";
  /// Name of the column holding the target; absent means no target.
  std::optional<std::string> target;
  /// Task of the target. When unset, a numeric target with values in {0,1}
  /// is binary and any other numeric target is regression. A non-numeric
  /// target is reduced to one-vs-all on its alphabetically first label.
  std::optional<Task> task;
  /// Forced column kinds; unlisted columns are inferred (numeric unless some
  /// observed cell fails to parse).
  std::map<std::string, ColumnKind> kinds;
};

struct Dataset {
  MaskedMatrix x;
  std::optional<TargetVector> y;
};

Dataset read_csv(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset parse_csv(const std::string& text, const CsvOptions& options = {});

/// Writes a header row and one line per row; masked cells become the NA token,
/// categorical cells their level label. The target, when given, is appended
/// as the last column named `target_name`.
void write_csv(const std::filesystem::path& path, const MaskedMatrix& x, const TargetVector* y = nullptr,
               const std::string& target_name = "y", const std::string& na_token = "NA");
std::string format_csv(const MaskedMatrix& x, const TargetVector* y = nullptr, const std::string& target_name = "y",
                       const std::string& na_token = "NA");

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace missreg
