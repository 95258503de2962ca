#include "packcool/checkpoint.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace packcool {

namespace {

constexpr const char* kMagic = "PACKCOOL-CKPT v1";

void write_net(std::ofstream& out, const MlpParams& p) {
  char buf[40];
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    const Mat& w = p.W[l];
    out << w.rows << ' ' << (w.cols + 1) << '\n';
    for (int r = 0; r < w.rows; ++r) {
      for (int c = 0; c < w.cols; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", w.at(r, c));
        out << buf << ' ';
      }
      std::snprintf(buf, sizeof buf, "%.17g", p.b[l][static_cast<std::size_t>(r)]);
      out << buf << '\n';
    }
  }
}

struct Block {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;  // row-major, bias in the last column
};

double parse_token(const std::string& tok) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    throw CheckpointError("checkpoint: unparseable float '" + tok + "'");
  if (!std::isfinite(v)) throw CheckpointError("checkpoint: non-finite parameter");
  return v;
}

MlpParams net_from_blocks(std::span<const Block> blocks, OutputActivation act) {
  MlpParams p;
  p.out_act = act;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& blk = blocks[i];
    if (i > 0 && blk.cols != blocks[i - 1].rows + 1)
      throw CheckpointError("checkpoint: layer shapes do not chain");
    Mat w(blk.rows, blk.cols - 1);
    std::vector<double> b(static_cast<std::size_t>(blk.rows));
    for (int r = 0; r < blk.rows; ++r) {
      for (int c = 0; c + 1 < blk.cols; ++c)
        w.at(r, c) = blk.a[static_cast<std::size_t>(r) * blk.cols + c];
      b[static_cast<std::size_t>(r)] =
          blk.a[static_cast<std::size_t>(r) * blk.cols + (blk.cols - 1)];
    }
    p.W.push_back(std::move(w));
    p.b.push_back(std::move(b));
  }
  return p;
}

}  // namespace

void save_checkpoint(const MlpParams& value, const MlpParams& policy,
                     const std::filesystem::path& path) {
  if (value.W.size() != policy.W.size())
    throw std::invalid_argument("save_checkpoint: nets must have the same depth");
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
  out << kMagic << '\n';
  write_net(out, value);
  write_net(out, policy);
  out.flush();
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path.string());
}

std::pair<MlpParams, MlpParams> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
  std::string magic;
  if (!std::getline(in, magic)) throw CheckpointError("checkpoint: empty file");
  if (!magic.empty() && magic.back() == '\r') magic.pop_back();
  if (magic != kMagic) throw CheckpointError("checkpoint: bad version line '" + magic + "'");

  std::vector<Block> blocks;
  std::string tok;
  while (in >> tok) {
    Block blk;
    const double rows_v = parse_token(tok);
    if (!(in >> tok)) throw CheckpointError("checkpoint: truncated block header");
    const double cols_v = parse_token(tok);
    blk.rows = static_cast<int>(rows_v);
    blk.cols = static_cast<int>(cols_v);
    if (blk.rows < 1 || blk.cols < 2 || rows_v != blk.rows || cols_v != blk.cols)
      throw CheckpointError("checkpoint: bad block shape");
    blk.a.resize(static_cast<std::size_t>(blk.rows) * blk.cols);
    for (double& v : blk.a) {
      if (!(in >> tok)) throw CheckpointError("checkpoint: truncated block data");
      v = parse_token(tok);
    }
    blocks.push_back(std::move(blk));
  }
  if (blocks.empty() || blocks.size() % 2 != 0)
    throw CheckpointError("checkpoint: expected an even, nonzero number of layer blocks");

  const std::span<const Block> all(blocks);
  const std::size_t half = blocks.size() / 2;
  MlpParams value = net_from_blocks(all.subspan(0, half), OutputActivation::kIdentity);
  MlpParams policy = net_from_blocks(all.subspan(half), OutputActivation::kTanh);
  return {std::move(value), std::move(policy)};
}

}  // namespace packcool
