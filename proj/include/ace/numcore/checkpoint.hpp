#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ace/numcore/param_store.hpp"

namespace ace::num {

/// First line of a checkpoint:
///   ace-ckpt v1 <variant> <N> <d> <dims...>
/// followed by one record per block:
///   block <name> <rows> <cols>\n<rows*cols little-endian float64, row-major>
struct CheckpointHeader {
  std::string variant;
  int actors = 1;
  int depth = 0;
  std::vector<double> dims;
};

struct Checkpoint {
  CheckpointHeader header;
  ParamStore params;
};

void write_checkpoint(std::ostream& out, const CheckpointHeader& header, const ParamStore& store);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const CheckpointHeader& header,
                     const ParamStore& store);
/// Throws ConfigError on a missing or malformed file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ace::num
