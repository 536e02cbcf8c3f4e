#include "bevkit/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <functional>
#include <numeric>

#include "bevkit/error.hpp"
#include "bevkit/scene_io.hpp"

static_assert(std::endian::native == std::endian::little, "tensor I/O assumes a little-endian host");

namespace bevkit {

namespace {

constexpr char kMagic[4] = {'B', 'E', 'V', 'T'};

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

std::uint32_t get_u32(const std::string& in, std::size_t& pos) {
  if (in.size() - pos < 4) raise(ErrorKind::kTruncated, "header ends before dims");
  std::uint32_t v;
  std::memcpy(&v, in.data() + pos, 4);
  pos += 4;
  return v;
}

}  // namespace

std::size_t Tensor::element_count() const {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

std::string encode_tensor(const Tensor& t) {
  require(t.values.size() == t.element_count(), "tensor values do not match dims");
  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(kTensorVersion));
  out.push_back(static_cast<char>(kTensorDtypeF32));
  put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
  for (auto d : t.dims) put_u32(out, d);
  const std::size_t header = out.size();
  out.resize(header + t.values.size() * sizeof(float));
  if (!t.values.empty()) std::memcpy(out.data() + header, t.values.data(), t.values.size() * sizeof(float));
  return out;
}

Tensor decode_tensor(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) raise(ErrorKind::kBadMagic, "missing BEVT magic");
  if (bytes.size() < 6) raise(ErrorKind::kTruncated, "header ends before dtype");
  if (static_cast<std::uint8_t>(bytes[4]) != kTensorVersion) {
    raise(ErrorKind::kBadVersion, "unsupported version " + std::to_string(static_cast<std::uint8_t>(bytes[4])));
  }
  if (static_cast<std::uint8_t>(bytes[5]) != kTensorDtypeF32) {
    raise(ErrorKind::kBadDtype, "unsupported dtype " + std::to_string(static_cast<std::uint8_t>(bytes[5])));
  }
  std::size_t pos = 6;
  const std::uint32_t ndim = get_u32(bytes, pos);
  Tensor t;
  if (ndim > (bytes.size() - pos) / 4) raise(ErrorKind::kTruncated, "header ends before dims");
  t.dims.reserve(ndim);
  const std::uint64_t limit = bytes.size() + 1;
  std::uint64_t count = 1;
  for (std::uint32_t i = 0; i < ndim; ++i) {
    t.dims.push_back(get_u32(bytes, pos));
    // Saturate at limit; a later zero dim still yields an empty payload.
    const std::uint64_t d = t.dims.back();
    count = (d != 0 && count > limit / d) ? limit : std::min(count * d, limit);
  }
  const std::size_t payload = static_cast<std::size_t>(count) * sizeof(float);
  if (bytes.size() - pos != payload) {
    raise(ErrorKind::kTruncated, "payload has " + std::to_string(bytes.size() - pos) + " bytes, dims need " +
                                     std::to_string(payload));
  }
  t.values.resize(static_cast<std::size_t>(count));
  if (payload) std::memcpy(t.values.data(), bytes.data() + pos, payload);
  return t;
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) { write_file_atomic(path, encode_tensor(t)); }

Tensor load_tensor(const std::filesystem::path& path) { return decode_tensor(read_text_file(path)); }

Tensor to_tensor(const ProbMap& m) {
  const auto v = m.values();
  return {{static_cast<std::uint32_t>(m.grid().rows), static_cast<std::uint32_t>(m.grid().cols)},
          std::vector<float>(v.begin(), v.end())};
}

ProbMap prob_map_from_tensor(const Tensor& t, BevGridSpec grid) {
  if (t.dims.size() != 2) raise(ErrorKind::kConfiguration, "mask tensor must be 2-D");
  grid.rows = static_cast<int>(t.dims[0]);
  grid.cols = static_cast<int>(t.dims[1]);
  return ProbMap(grid, t.values);
}

Tensor to_tensor(const BevTensor& t) {
  const auto v = t.values();
  return {{static_cast<std::uint32_t>(t.channels()), static_cast<std::uint32_t>(t.rows()),
           static_cast<std::uint32_t>(t.cols())},
          std::vector<float>(v.begin(), v.end())};
}

}  // namespace bevkit
