#include "crpmap/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

namespace crpmap {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::size_t used = 0;
  try {
    const double v = std::stod(text, &used);
    if (used != text.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Dataset parse_dataset_csv(std::istream& in, const CsvOptions& options, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> names;
  std::optional<std::size_t> label_idx;  // 0-based

  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!trim(line).empty()) return true;
    }
    return false;
  };

  std::vector<std::string> first;
  bool have_first = next_line();
  if (!have_first) throw InputError(source + ": no data rows");
  first = split_fields(line);
  if (options.header) {
    for (auto& f : first) names.push_back(trim(f));
  }
  if (options.label_column) {
    const std::string& wanted = *options.label_column;
    if (auto idx = parse_double(wanted); idx && *idx >= 1 && *idx == static_cast<double>(static_cast<std::size_t>(*idx))) {
      label_idx = static_cast<std::size_t>(*idx) - 1;
    } else if (options.header) {
      for (std::size_t j = 0; j < names.size(); ++j) {
        if (names[j] == wanted) label_idx = j;
      }
      if (!label_idx) throw InputError(source + ": no column named '" + wanted + "'");
    } else {
      throw InputError(source + ": label column '" + wanted + "' is not a 1-based index and there is no header");
    }
    if (*label_idx >= first.size()) {
      throw InputError(source + ": label column " + std::to_string(*label_idx + 1) + " exceeds the " +
                       std::to_string(first.size()) + " columns");
    }
  }

  const std::size_t width = first.size();
  std::vector<double> values;
  std::vector<std::string> raw_labels;
  std::size_t rows = 0;
  auto consume = [&](const std::vector<std::string>& fields) {
    if (fields.size() != width) {
      throw InputError(source + ": line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                       " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < width; ++j) {
      const std::string cell = trim(fields[j]);
      if (label_idx && j == *label_idx) {
        raw_labels.push_back(cell);
        continue;
      }
      const auto v = parse_double(cell);
      if (!v || !std::isfinite(*v)) {
        std::string column = "column " + std::to_string(j + 1);
        if (!names.empty()) column += " ('" + names[j] + "')";
        throw InputError(source + ": line " + std::to_string(line_no) + ", " + column + ": " +
                         (v ? "non-finite" : "non-numeric") + " value '" + cell + "'");
      }
      values.push_back(*v);
    }
    ++rows;
  };
  if (!options.header) consume(first);
  while (next_line()) consume(split_fields(line));
  if (rows == 0) throw InputError(source + ": no data rows");

  const std::size_t dim = width - (label_idx ? 1 : 0);
  if (dim == 0) throw InputError(source + ": no feature columns");
  Dataset data{Matrix(rows, dim, std::move(values)), std::nullopt, {}};
  if (options.header) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (!label_idx || j != *label_idx) data.feature_names.push_back(names[j]);
    }
  }
  if (label_idx) {
    std::map<std::string, int> ids;
    std::vector<int> labels;
    labels.reserve(raw_labels.size());
    for (const auto& l : raw_labels) labels.push_back(ids.try_emplace(l, static_cast<int>(ids.size())).first->second);
    data.labels = std::move(labels);
  }
  data.validate();
  return data;
}

Dataset read_dataset_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  return parse_dataset_csv(in, options, path.string());
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    auto out = open_out(tmp);
    out << text;
    if (!out.flush()) throw IoError("cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot write " + path.string() + ": " + ec.message());
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ostringstream out;
  for (std::size_t d = 0; d < data.dim(); ++d) {
    if (d) out << ',';
    out << (data.feature_names.empty() ? "x" + std::to_string(d + 1) : data.feature_names[d]);
  }
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t d = 0; d < data.dim(); ++d) {
      if (d) out << ',';
      out << format_double(data.x(i, d));
    }
    out << '\n';
  }
  write_text_atomic(path, out.str());
}

void write_assignments_csv(const std::filesystem::path& path, std::span<const int> labels) {
  std::ostringstream out;
  out << "row,cluster\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << i + 1 << ',' << labels[i] + 1 << '\n';
  write_text_atomic(path, out.str());
}

std::vector<int> read_assignments_csv(const std::filesystem::path& path) {
  const Dataset table = read_dataset_csv(path, CsvOptions{true, std::nullopt});
  if (table.dim() != 2) throw InputError(path.string() + ": expected columns row,cluster");
  std::vector<int> labels;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table.x(i, 0) != static_cast<double>(i + 1)) {
      throw InputError(path.string() + ": line " + std::to_string(i + 2) + ": rows must run 1..N in order");
    }
    const double c = table.x(i, 1);
    if (c < 1 || c != static_cast<double>(static_cast<long>(c))) {
      throw InputError(path.string() + ": line " + std::to_string(i + 2) + ": cluster ids must be positive integers");
    }
    labels.push_back(static_cast<int>(c) - 1);
  }
  return labels;
}

void write_trace_csv(const std::filesystem::path& path, std::span<const double> trace) {
  std::ostringstream out;
  out << "sweep,nll\n";
  for (std::size_t t = 0; t < trace.size(); ++t) out << t + 1 << ',' << format_double(trace[t]) << '\n';
  write_text_atomic(path, out.str());
}

std::vector<double> cluster_size_profile(const Partition& partition) {
  std::vector<double> sizes;
  for (std::size_t c : partition.counts) sizes.push_back(static_cast<double>(c) / static_cast<double>(partition.size()));
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  return sizes;
}

void write_cluster_sizes_csv(const std::filesystem::path& path, std::span<const ClusterSizeRow> rows) {
  std::ostringstream out;
  out << "rank,nk_over_n,method\n";
  for (const auto& r : rows) out << r.rank << ',' << format_double(r.nk_over_n) << ',' << r.method << '\n';
  write_text_atomic(path, out.str());
}

nlohmann::json prior_to_json(const NGPrior& prior) {
  return {{"m0", prior.m0}, {"c0", prior.c0}, {"b0", prior.b0}, {"a0", prior.a0}};
}

NGPrior prior_from_json(const nlohmann::json& j) {
  try {
    NGPrior p{j.at("m0").get<std::vector<double>>(), j.at("c0").get<double>(),
              j.at("b0").get<std::vector<double>>(), j.at("a0").get<double>()};
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed prior: ") + e.what());
  }
}

nlohmann::json model_to_json(const FittedModel& model) {
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& s : model.clusters) clusters.push_back({{"S", s.sum}, {"V", s.sum_sq}, {"Nk", s.count}});
  return {{"prior", prior_to_json(model.prior)}, {"alpha", model.alpha}, {"clusters", clusters}};
}

FittedModel model_from_json(const nlohmann::json& j) {
  try {
    FittedModel model;
    model.prior = prior_from_json(j.at("prior"));
    model.alpha = j.at("alpha").get<double>();
    if (!(model.alpha > 0.0)) throw InputError("model alpha must be positive");
    for (const auto& c : j.at("clusters")) {
      SufficientStats s(model.prior.dim());
      s.sum = c.at("S").get<std::vector<double>>();
      s.sum_sq = c.at("V").get<std::vector<double>>();
      s.count = c.at("Nk").get<std::size_t>();
      if (s.sum.size() != model.prior.dim() || s.sum_sq.size() != model.prior.dim()) {
        throw InputError("cluster statistics and prior dimensions differ");
      }
      if (s.count == 0) throw InputError("model contains an empty cluster");
      model.clusters.push_back(std::move(s));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed model: ") + e.what());
  }
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

}  // namespace crpmap
