#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "synthts/market_data.hpp"

namespace synthts::io {

using Metadata = std::map<std::string, std::string>;

struct Dataset {
  ReturnMatrix matrix;
  Metadata meta;  // caller keys only; layout keys are consumed by the reader
};

/// Sidecar path for a dataset CSV: `<csv>.meta`.
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

/// Writes `path_id,step,value` rows plus the key=value sidecar holding the
/// shape, per-row normalization stats and every entry of `meta`. Values use
/// shortest round-trip formatting, so read_dataset reproduces the matrix
/// bit for bit. Both files are replaced atomically.
void write_dataset(const std::filesystem::path& csv, const ReturnMatrix& m, const Metadata& meta = {});
Dataset read_dataset(const std::filesystem::path& csv);

std::string serialize_dataset_csv(const ReturnMatrix& m);
std::string serialize_metadata(const Metadata& meta);
Metadata parse_metadata(std::string_view text);

/// Write `content` to a temp file next to `path`, then rename over it.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

std::string join_doubles(std::span<const double> values, char sep = ',');
std::vector<double> split_doubles(std::string_view text, char sep = ',');

}  // namespace synthts::io
