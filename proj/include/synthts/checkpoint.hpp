#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "synthts/dae.hpp"

namespace synthts::io {

inline constexpr int kCheckpointVersion = 1;

/// Text checkpoint:
///
///   synthts-checkpoint
///   version=1
///   sha256=<hex digest of every byte after this line>
///   arch=n=243;enc=1:8:3:3,...
///   seed=... / epochs_trained=... / train.*=...
///   param enc0.weight 72
///   <one shortest-round-trip decimal per line>
///   ...
std::string serialize_checkpoint(const dae::DaeModel& model);
dae::DaeModel parse_checkpoint(std::string_view text,
                               const std::optional<dae::DaeArchitecture>& expected = std::nullopt);

void save_checkpoint(const dae::DaeModel& model, const std::filesystem::path& path);
/// Verifies version and digest, and that every parameter block matches the
/// declared architecture. When `expected` is given, a different architecture
/// is rejected with ShapeError before any weights are read.
dae::DaeModel load_checkpoint(const std::filesystem::path& path,
                              const std::optional<dae::DaeArchitecture>& expected = std::nullopt);

/// Digest recorded in a checkpoint file.
std::string checkpoint_hash(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);

}  // namespace synthts::io
