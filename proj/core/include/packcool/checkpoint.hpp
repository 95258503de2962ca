#pragma once

#include <filesystem>
#include <stdexcept>
#include <utility>

#include "packcool/mlp.hpp"

namespace packcool {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Versioned text format: a magic first line, then for every layer of the
/// value net followed by every layer of the policy net one block
///   rows cols
///   <rows lines of cols floats at 17 significant digits>
/// where each block stores [W | b] with the bias as the trailing column
/// (cols = fan_in + 1). Both nets have the same depth, so the loader splits
/// the block list in half; the value net comes first.
void save_checkpoint(const MlpParams& value, const MlpParams& policy,
                     const std::filesystem::path& path);

/// Returns (value, policy). Throws CheckpointError on a bad magic line,
/// truncation, non-finite entries, or blocks whose shapes do not chain.
std::pair<MlpParams, MlpParams> load_checkpoint(const std::filesystem::path& path);

}  // namespace packcool
