#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "crpmap/core.hpp"
#include "crpmap/eval.hpp"

namespace crpmap {

struct CsvOptions {
  bool header = false;
  /// 1-based column index, or a header name when `header` is set.
  std::optional<std::string> label_column;
};

/// Comma-separated numeric features. Errors name the offending line and column.
/// String labels are mapped to integer ids by order of first appearance.
Dataset parse_dataset_csv(std::istream& in, const CsvOptions& options,
                          const std::string& source = "<input>");
Dataset read_dataset_csv(const std::filesystem::path& path, const CsvOptions& options);

/// Header x1..xD unless the dataset carries feature names; 17 significant digits.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);

/// Columns (row, cluster), both 1-based.
void write_assignments_csv(const std::filesystem::path& path, std::span<const int> labels);
/// Returns 0-based ids in file order; `row` must run 1..N.
std::vector<int> read_assignments_csv(const std::filesystem::path& path);

void write_trace_csv(const std::filesystem::path& path, std::span<const double> trace);

struct ClusterSizeRow {
  std::size_t rank = 0;  // 1 = largest
  double nk_over_n = 0.0;
  std::string method;
};

/// N_k / N in decreasing order.
std::vector<double> cluster_size_profile(const Partition& partition);
void write_cluster_sizes_csv(const std::filesystem::path& path, std::span<const ClusterSizeRow> rows);

nlohmann::json prior_to_json(const NGPrior& prior);
NGPrior prior_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::json& j);

nlohmann::json read_json(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace crpmap
