/* Copyright 2026 The WeakCube Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <bit>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "weakcube/image_io.hpp"

namespace weakcube {
namespace {

DepthMap random_depth(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> d(0.1f, 30.0f);
  DepthMap m(w, h);
  for (auto& v : m.values) v = d(rng);
  m.values[3] = std::numeric_limits<float>::quiet_NaN();
  m.values[5] = std::numeric_limits<float>::infinity();
  m.values[7] = std::numeric_limits<float>::denorm_min();
  return m;
}

bool same_bits(const DepthMap& a, const DepthMap& b) {
  if (a.width != b.width || a.height != b.height || a.values.size() != b.values.size()) {
    return false;
  }
  return std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(float)) == 0;
}

TEST(Pfm, HeaderAndLayout) {
  DepthMap d(2, 2);
  d.at(0, 0) = 1.0f;
  d.at(1, 0) = 2.0f;
  d.at(0, 1) = 3.0f;
  d.at(1, 1) = 4.0f;
  const std::string bytes = encode_pfm(d);
  const std::string header = "Pf\n2 2\n-1.0\n";
  ASSERT_EQ(bytes.substr(0, header.size()), header);
  ASSERT_EQ(bytes.size(), header.size() + 16);
  // Bottom row first, little-endian.
  float first;
  std::memcpy(&first, bytes.data() + header.size(), 4);
  EXPECT_EQ(first, 3.0f);
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + 3]), 0x40);  // 3.0f = 0x40400000
}

TEST(Pfm, BitExactRoundTrip) {
  const DepthMap d = random_depth(37, 23, 1);
  EXPECT_TRUE(same_bits(decode_pfm(encode_pfm(d)), d));
  EXPECT_EQ(encode_pfm(decode_pfm(encode_pfm(d))), encode_pfm(d));
}

TEST(Pfm, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "weakcube_test_pfm";
  std::filesystem::create_directories(dir);
  const DepthMap d = random_depth(16, 9, 2);
  write_pfm(dir / "d.pfm", d);
  EXPECT_FALSE(std::filesystem::exists(dir / "d.pfm.tmp"));
  EXPECT_TRUE(same_bits(read_pfm(dir / "d.pfm"), d));
  std::filesystem::remove_all(dir);
}

TEST(Pfm, BigEndianIsAccepted) {
  std::string bytes = "Pf\n1 1\n1.0\n";
  const std::uint32_t bits = std::bit_cast<std::uint32_t>(2.5f);
  for (int k = 3; k >= 0; --k) bytes.push_back(static_cast<char>((bits >> (8 * k)) & 0xFF));
  EXPECT_EQ(decode_pfm(bytes).at(0, 0), 2.5f);
}

TEST(Pfm, MalformedInputsThrow) {
  const std::string good = encode_pfm(random_depth(4, 4, 3));
  EXPECT_THROW(decode_pfm(""), FormatError);
  EXPECT_THROW(decode_pfm("PF\n4 4\n-1.0\n"), FormatError);  // color PFM
  EXPECT_THROW(decode_pfm("Pf\n4 x\n-1.0\n"), FormatError);
  EXPECT_THROW(decode_pfm("Pf\n4 4\n0\n"), FormatError);
  EXPECT_THROW(decode_pfm("Pf\n4 4"), FormatError);
  EXPECT_THROW(decode_pfm(good.substr(0, good.size() - 1)), FormatError);
  EXPECT_THROW(read_pfm("/nonexistent/depth.pfm"), IoError);
}

TEST(Pgm, BitExactRoundTrip) {
  GroundMask m(13, 7);
  std::mt19937_64 rng(4);
  for (auto& v : m.values) v = rng() & 1;
  const std::string bytes = encode_pgm(m);
  EXPECT_EQ(bytes.substr(0, 11), "P5\n13 7\n255");
  const GroundMask back = decode_pgm(bytes);
  EXPECT_EQ(back.values, m.values);
  EXPECT_EQ(encode_pgm(back), bytes);
}

TEST(Pgm, CommentsAndThreshold) {
  std::string bytes = "P5\n# a comment\n3 1\n# another\n255\n";
  bytes += std::string("\x00\x7f\xff", 3);
  const GroundMask m = decode_pgm(bytes);
  EXPECT_FALSE(m.at(0, 0));
  EXPECT_FALSE(m.at(1, 0));
  EXPECT_TRUE(m.at(2, 0));
}

TEST(Pgm, MalformedInputsThrow) {
  EXPECT_THROW(decode_pgm("P2\n1 1\n255\n0"), FormatError);
  EXPECT_THROW(decode_pgm("P5\n2 2\n255\n\x01"), FormatError);
  EXPECT_THROW(decode_pgm("P5\n1 1\n65535\n\x00\x00"), FormatError);
}

TEST(GroundMask, Coverage) {
  GroundMask m(10, 10);
  EXPECT_EQ(m.coverage(), 0.0);
  for (int x = 0; x < 10; ++x) m.set(x, 9, true);
  EXPECT_DOUBLE_EQ(m.coverage(), 0.1);
}

}  // namespace
}  // namespace weakcube
