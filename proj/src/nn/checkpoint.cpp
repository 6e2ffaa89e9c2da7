#include "qform/nn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <string>

#include "qform/error.hpp"

namespace qform::nn {

namespace {

template <typename U>
void put_le(std::ostream& out, U value) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw ParseError(0, "truncated checkpoint");
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(bytes[i]) << (8 * i);
  }
  return value;
}

}  // namespace

void write_checkpoint(std::ostream& out, const ParameterList<float>& params) {
  out.write(kCheckpointMagic, 4);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const Parameter<float>* p : params) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    const auto& shape = p->value.shape();
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(shape.size()));
    for (auto d : shape) put_le<std::uint64_t>(out, d);
    for (float v : p->value.values()) {
      put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
    }
  }
  if (!out) throw Error("io", "failed writing checkpoint");
}

void read_checkpoint(std::istream& in, const ParameterList<float>& params) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw ParseError(0, "not a checkpoint file");
  }
  if (get_le<std::uint32_t>(in) != kCheckpointVersion) {
    throw ParseError(0, "unsupported checkpoint version");
  }
  const auto count = get_le<std::uint32_t>(in);
  if (count != params.size()) {
    throw ParseError(0, "checkpoint has " + std::to_string(count) +
                            " tensors, model expects " +
                            std::to_string(params.size()));
  }
  for (Parameter<float>* p : params) {
    const auto name_len = get_le<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in || name != p->name) {
      throw ParseError(0, "expected tensor " + p->name + ", found " + name);
    }
    const auto rank = get_le<std::uint32_t>(in);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(get_le<std::uint64_t>(in));
    if (shape != p->value.shape()) throw ShapeError("checkpoint shape mismatch for " + name);
    for (float& v : p->value.values()) {
      v = std::bit_cast<float>(get_le<std::uint32_t>(in));
    }
  }
}

}  // namespace qform::nn
