#pragma once

#include <istream>
#include <ostream>

#include "qform/nn/tensor.hpp"

namespace qform::nn {

// Binary layout, all integers and floats little-endian:
//   "QFCK" | u32 version | u32 count
//   per tensor: u32 name_len | name | u32 rank | u64 dims[rank] | f32 values
inline constexpr char kCheckpointMagic[4] = {'Q', 'F', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const ParameterList<float>& params);

/// Loads values into `params`, which must match the stored names, order and
/// shapes exactly.
void read_checkpoint(std::istream& in, const ParameterList<float>& params);

}  // namespace qform::nn
