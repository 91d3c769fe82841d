#include "synthts/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include "synthts/error.hpp"
#include "synthts/format.hpp"

namespace synthts::io {

namespace fs = std::filesystem;

fs::path sidecar_path(const fs::path& csv) { return fs::path(csv.string() + ".meta"); }

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string join_doubles(std::span<const double> values, char sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    out += format_double(values[i]);
  }
  return out;
}

std::vector<double> split_doubles(std::string_view text, char sep) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (auto tok : split(text, sep)) out.push_back(parse_double(trim(tok)));
  return out;
}

std::string serialize_dataset_csv(const ReturnMatrix& m) {
  std::string out = "path_id,step,value\n";
  out.reserve(m.rows() * m.cols() * 28);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    const std::string prefix = std::to_string(r) + ',';
    for (std::size_t j = 0; j < row.size(); ++j) {
      out += prefix;
      out += std::to_string(j);
      out += ',';
      out += format_double(row[j]);
      out += '\n';
    }
  }
  return out;
}

std::string serialize_metadata(const Metadata& meta) {
  std::string out;
  for (const auto& [k, v] : meta) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos)
      throw InvalidArgument("metadata key/value not representable: " + k);
    out += k + '=' + v + '\n';
  }
  return out;
}

Metadata parse_metadata(std::string_view text) {
  Metadata meta;
  std::size_t lineno = 0;
  for (auto line : split(text, '\n')) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw FormatError("metadata line " + std::to_string(lineno) + ": missing '='");
    meta[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
  }
  return meta;
}

void write_dataset(const fs::path& csv, const ReturnMatrix& m, const Metadata& meta) {
  Metadata all = meta;
  all["format"] = "synthts-paths";
  all["version"] = "1";
  all["rows"] = std::to_string(m.rows());
  all["cols"] = std::to_string(m.cols());
  all["normalized"] = m.normalized() ? "true" : "false";
  if (m.norm_stats()) {
    std::vector<double> means, stds;
    for (const auto& s : *m.norm_stats()) {
      means.push_back(s.mean);
      stds.push_back(s.std);
    }
    all["norm_mean"] = join_doubles(means);
    all["norm_std"] = join_doubles(stds);
  }
  write_file_atomic(csv, serialize_dataset_csv(m));
  write_file_atomic(sidecar_path(csv), serialize_metadata(all));
}

Dataset read_dataset(const fs::path& csv) {
  if (!fs::exists(csv)) throw InvalidArgument("dataset not found: " + csv.string());
  const std::string text = read_file(csv);
  std::vector<double> values;
  std::size_t rows = 0, cols = 0, lineno = 0;
  std::size_t cur_row = 0, cur_steps = 0;
  bool header = true, any = false;
  auto fail = [&](const std::string& msg) {
    throw FormatError(csv.string() + ":" + std::to_string(lineno) + ": " + msg);
  };
  for (auto line : split(text, '\n')) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      if (line != "path_id,step,value") fail("expected header 'path_id,step,value'");
      header = false;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 3) fail("expected 3 fields");
    const auto row = static_cast<std::size_t>(parse_int(f[0]));
    const auto step = static_cast<std::size_t>(parse_int(f[1]));
    if (!any) {
      if (row != 0) fail("first path_id must be 0");
      any = true;
    } else if (row == cur_row + 1) {
      if (cols == 0) cols = cur_steps;
      if (cur_steps != cols) fail("path " + std::to_string(cur_row) + " has " + std::to_string(cur_steps) +
                                  " steps, expected " + std::to_string(cols));
      cur_row = row;
      cur_steps = 0;
    } else if (row != cur_row) {
      fail("path ids must be consecutive");
    }
    if (step != cur_steps) fail("expected step " + std::to_string(cur_steps));
    values.push_back(parse_double(f[2]));
    ++cur_steps;
  }
  if (header) throw FormatError(csv.string() + ": empty dataset file");
  if (any) {
    if (cols == 0) cols = cur_steps;
    if (cur_steps != cols) throw FormatError(csv.string() + ": last path is truncated");
    rows = cur_row + 1;
  }

  Dataset ds;
  ds.matrix = ReturnMatrix(rows, cols, std::move(values));
  const fs::path side = sidecar_path(csv);
  if (fs::exists(side)) {
    Metadata meta = parse_metadata(read_file(side));
    if (meta.count("rows") && std::stoull(meta["rows"]) != rows)
      throw FormatError(side.string() + ": row count does not match " + csv.string());
    if (meta.count("cols") && rows > 0 && std::stoull(meta["cols"]) != cols)
      throw FormatError(side.string() + ": column count does not match " + csv.string());
    if (meta["normalized"] == "true") {
      const auto means = split_doubles(meta["norm_mean"]);
      const auto stds = split_doubles(meta["norm_std"]);
      if (means.size() != rows || stds.size() != rows)
        throw FormatError(side.string() + ": normalization stats do not cover every row");
      std::vector<NormStats> stats(rows);
      for (std::size_t r = 0; r < rows; ++r) stats[r] = {means[r], stds[r]};
      ds.matrix.set_norm_stats(std::move(stats));
    }
    for (const char* k : {"format", "version", "rows", "cols", "normalized", "norm_mean", "norm_std"})
      meta.erase(k);
    ds.meta = std::move(meta);
  }
  return ds;
}

}  // namespace synthts::io
