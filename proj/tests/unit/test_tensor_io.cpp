#include <doctest.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include "bevkit/error.hpp"
#include "bevkit/tensor_io.hpp"

using namespace bevkit;
namespace fs = std::filesystem;

namespace {

ErrorKind decode_error(const std::string& bytes) {
  try {
    decode_tensor(bytes);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kIo;
}

std::uint32_t read_u32(const std::string& b, std::size_t at) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3])) << 24;
}

Tensor random_tensor(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ndim(0, 4);
  std::uniform_int_distribution<std::uint32_t> dim(0, 6);
  std::uniform_int_distribution<std::uint32_t> bits;
  Tensor t;
  const int n = ndim(rng);
  for (int i = 0; i < n; ++i) t.dims.push_back(dim(rng));
  t.values.resize(t.element_count());
  // Arbitrary bit patterns, NaN payloads and denormals included.
  for (auto& v : t.values) {
    const std::uint32_t b = bits(rng);
    std::memcpy(&v, &b, sizeof v);
  }
  return t;
}

bool bit_equal(const Tensor& a, const Tensor& b) {
  return a.dims == b.dims && a.values.size() == b.values.size() &&
         std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(float)) == 0;
}

}  // namespace

TEST_CASE("2x3 zeros encode to 42 bytes in the documented layout") {
  const Tensor t{{2, 3}, std::vector<float>(6, 0.0f)};
  const std::string b = encode_tensor(t);
  REQUIRE(b.size() == 42);
  CHECK(b.substr(0, 4) == "BEVT");
  CHECK(static_cast<unsigned char>(b[4]) == kTensorVersion);
  CHECK(static_cast<unsigned char>(b[5]) == kTensorDtypeF32);
  CHECK(read_u32(b, 6) == 2);
  CHECK(read_u32(b, 10) == 2);
  CHECK(read_u32(b, 14) == 3);
  for (std::size_t i = 18; i < 42; ++i) CHECK(b[i] == '\0');
}

TEST_CASE("payload is little-endian binary32, row-major") {
  const Tensor t{{2, 2}, {1.0f, -2.0f, 0.5f, 3.0f}};
  const std::string b = encode_tensor(t);
  // 1.0f = 0x3f800000, -2.0f = 0xc0000000.
  CHECK(read_u32(b, 18) == 0x3f800000u);
  CHECK(read_u32(b, 22) == 0xc0000000u);
  CHECK(read_u32(b, 26) == 0x3f000000u);
  CHECK(read_u32(b, 30) == 0x40400000u);
}

TEST_CASE("random tensors round trip bit-identically") {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 300; ++k) {
    const Tensor t = random_tensor(rng);
    CHECK(bit_equal(decode_tensor(encode_tensor(t)), t));
  }
}

TEST_CASE("save_tensor and load_tensor") {
  char pattern[] = "/tmp/bevkit_tensor_XXXXXX";
  const fs::path dir = ::mkdtemp(pattern);
  std::mt19937_64 rng(9);
  const Tensor t{{3, 4, 5}, std::vector<float>(60)};
  Tensor filled = t;
  std::normal_distribution<float> n;
  for (auto& v : filled.values) v = n(rng);
  save_tensor(dir / "x.bevt", filled);
  CHECK(fs::file_size(dir / "x.bevt") == 4 + 1 + 1 + 4 + 12 + 240);
  CHECK(bit_equal(load_tensor(dir / "x.bevt"), filled));
  try {
    load_tensor(dir / "missing.bevt");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIo);
  }
  fs::remove_all(dir);
}

TEST_CASE("decode errors have distinct kinds") {
  const std::string good = encode_tensor(Tensor{{2, 3}, std::vector<float>(6, 1.0f)});
  std::string bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(decode_error(bad_magic) == ErrorKind::kBadMagic);
  CHECK(decode_error("BEV") == ErrorKind::kBadMagic);
  std::string bad_version = good;
  bad_version[4] = 2;
  CHECK(decode_error(bad_version) == ErrorKind::kBadVersion);
  std::string bad_dtype = good;
  bad_dtype[5] = 1;
  CHECK(decode_error(bad_dtype) == ErrorKind::kBadDtype);
  CHECK(decode_error(good.substr(0, good.size() - 1)) == ErrorKind::kTruncated);
  CHECK(decode_error(good.substr(0, 12)) == ErrorKind::kTruncated);
  CHECK(decode_error(good.substr(0, 5)) == ErrorKind::kTruncated);
  CHECK(decode_error(good + "x") == ErrorKind::kTruncated);
  // Dimensions whose product overflows must not allocate.
  std::string huge = good.substr(0, 10);
  for (int i = 0; i < 2; ++i) huge += std::string("\xff\xff\xff\xff", 4);
  CHECK(decode_error(huge) == ErrorKind::kTruncated);
  // ndim claims more dims than present.
  std::string many = good;
  many[6] = 100;
  CHECK(decode_error(many) == ErrorKind::kTruncated);
}

TEST_CASE("every strict prefix of a valid file is rejected") {
  const std::string good = encode_tensor(Tensor{{2, 2}, {1, 2, 3, 4}});
  for (std::size_t n = 0; n < good.size(); ++n) CHECK_THROWS_AS(decode_tensor(good.substr(0, n)), Error);
}

TEST_CASE("tensor conversions") {
  BevGridSpec g;
  g.rows = 3;
  g.cols = 2;
  ProbMap m(g);
  m.set(1, 1, 0.75f);
  const Tensor t = to_tensor(m);
  CHECK(t.dims == std::vector<std::uint32_t>{3, 2});
  CHECK(t.values[3] == 0.75f);
  CHECK(prob_map_from_tensor(t, g) == m);
  // Missing grid: the default origin and cell size with the tensor's shape.
  const auto defaulted = prob_map_from_tensor(t);
  CHECK(defaulted.grid().rows == 3);
  CHECK(defaulted.grid().cols == 2);
  CHECK_THROWS_AS(prob_map_from_tensor(Tensor{{6}, std::vector<float>(6)}), Error);

  BevTensor bev(2, 3, 4, 5);
  bev.mutable_values()[bev.index(1, 2, 3, 4)] = 9.0f;
  const Tensor bt = to_tensor(bev);
  CHECK(bt.dims == std::vector<std::uint32_t>{6, 4, 5});
  CHECK(bt.values.back() == 9.0f);
}
