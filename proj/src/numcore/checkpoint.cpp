#include "ace/numcore/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ace/errors.hpp"

namespace ace::num {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {
std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

void write_checkpoint(std::ostream& out, const CheckpointHeader& header, const ParamStore& store) {
  out << "ace-ckpt v1 " << header.variant << ' ' << header.actors << ' ' << header.depth;
  for (double d : header.dims) out << ' ' << format_number(d);
  out << '\n';
  for (const auto& blk : store.blocks()) {
    out << "block " << blk.name << ' ' << blk.value.rows() << ' ' << blk.value.cols() << '\n';
    for (Eigen::Index r = 0; r < blk.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < blk.value.cols(); ++c) {
        const double v = blk.value(r, c);
        char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof v);
        out.write(bytes, sizeof bytes);
      }
    }
  }
  if (!out) throw ConfigError("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  Checkpoint ck;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("checkpoint: empty stream");
  {
    std::istringstream hs(line);
    std::string magic, version;
    hs >> magic >> version >> ck.header.variant >> ck.header.actors >> ck.header.depth;
    if (!hs || magic != "ace-ckpt" || version != "v1") {
      throw ConfigError("checkpoint: bad header '" + line + "'");
    }
    double d;
    while (hs >> d) ck.header.dims.push_back(d);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream bs(line);
    std::string tag, name;
    Eigen::Index rows = 0, cols = 0;
    bs >> tag >> name >> rows >> cols;
    if (!bs || tag != "block" || rows < 0 || cols < 0) {
      throw ConfigError("checkpoint: bad block record '" + line + "'");
    }
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        char bytes[sizeof(double)];
        if (!in.read(bytes, sizeof bytes)) {
          throw ConfigError("checkpoint: truncated block '" + name + "'");
        }
        double v;
        std::memcpy(&v, bytes, sizeof v);
        m(r, c) = v;
      }
    }
    ck.params.add(name, std::move(m));
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const CheckpointHeader& header,
                     const ParamStore& store) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("checkpoint: cannot open '" + path.string() + "' for writing");
  write_checkpoint(out, header, store);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint: cannot open '" + path.string() + "'");
  return read_checkpoint(in);
}

}  // namespace ace::num
