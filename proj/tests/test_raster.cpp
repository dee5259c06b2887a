// Copyright 2026 The berrycount Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <string>

#include "berrycount/raster.hpp"
#include "berrycount/rng.hpp"
#include "oracles.hpp"

namespace berrycount {
namespace {

std::string pgm8(int w, int h, std::initializer_list<int> bytes) {
  std::string s = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  for (int b : bytes) s.push_back(static_cast<char>(b));
  return s;
}

std::string pgm16(int w, int h, std::initializer_list<int> bytes) {
  std::string s = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n65535\n";
  for (int b : bytes) s.push_back(static_cast<char>(b));
  return s;
}

TEST(SemanticCodec, DecodesClassCodes) {
  const auto m = decode_semantic_mask(pgm8(2, 1, {0, 128}));
  ASSERT_EQ(m.width(), 2);
  ASSERT_EQ(m.height(), 1);
  EXPECT_EQ(m(0, 0), Class::Background);
  EXPECT_EQ(m(1, 0), Class::Berry);
  EXPECT_EQ(decode_semantic_mask(pgm8(1, 1, {255}))(0, 0), Class::Edge);
}

TEST(SemanticCodec, RejectsUnknownClassValue) {
  try {
    decode_semantic_mask(pgm8(1, 1, {7}));
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("invalid class value"), std::string::npos);
  }
}

TEST(SemanticCodec, ExactlyThreeByteValuesAccepted) {
  int accepted = 0;
  for (int v = 0; v < 256; ++v) {
    try {
      decode_semantic_mask(pgm8(1, 1, {v}));
      ++accepted;
      EXPECT_TRUE(v == 0 || v == 128 || v == 255) << v;
    } catch (const FormatError&) {
    }
  }
  EXPECT_EQ(accepted, 3);
}

TEST(SemanticCodec, EncodesHeaderAndPayload) {
  SemanticMask one(1, 1, Class::Background);
  EXPECT_EQ(encode_semantic_mask(one), std::string("P5\n1 1\n255\n") + '\0');
  SemanticMask two(2, 1);
  two(0, 0) = Class::Berry;
  two(1, 0) = Class::Edge;
  const std::string bytes = encode_semantic_mask(two);
  ASSERT_GE(bytes.size(), 2u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[bytes.size() - 2]), 128);
  EXPECT_EQ(static_cast<unsigned char>(bytes[bytes.size() - 1]), 255);
}

TEST(SemanticCodec, RoundTripsRandomMasks) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = rng.range(1, 40), h = rng.range(1, 40);
    const SemanticMask m = oracle::random_mask(rng, w, h);
    const std::string bytes = encode_semantic_mask(m);
    EXPECT_EQ(decode_semantic_mask(bytes), m);
    EXPECT_EQ(encode_semantic_mask(decode_semantic_mask(bytes)), bytes);
  }
}

TEST(PgmCodec, RejectsMalformedInput) {
  EXPECT_THROW(decode_semantic_mask("P2\n1 1\n255\n0"), FormatError);
  EXPECT_THROW(decode_semantic_mask("P5\n1\n255\n"), FormatError);
  EXPECT_THROW(decode_semantic_mask("P5\n0 1\n255\n"), FormatError);
  EXPECT_THROW(decode_semantic_mask(pgm8(2, 2, {0, 0, 0})), FormatError);  // truncated
  EXPECT_THROW(decode_semantic_mask(pgm16(1, 1, {0, 0})), FormatError);   // wrong maxval
}

TEST(PgmCodec, SkipsHeaderComments) {
  const std::string s = std::string("P5\n# made by hand\n1 1\n255\n") + static_cast<char>(128);
  EXPECT_EQ(decode_semantic_mask(s)(0, 0), Class::Berry);
}

TEST(InstanceCodec, DecodesBigEndianIds) {
  EXPECT_EQ(decode_instance_map(pgm16(1, 1, {0x00, 0x00}))(0, 0), 0);
  EXPECT_EQ(decode_instance_map(pgm16(1, 1, {0x00, 0x03}))(0, 0), 3);
  EXPECT_EQ(decode_instance_map(pgm16(1, 1, {0x01, 0x02}))(0, 0), 0x0102);
  const auto pair = decode_instance_map(pgm16(2, 1, {0, 1, 0, 1}));
  EXPECT_EQ(pair(0, 0), 1);
  EXPECT_EQ(pair(1, 0), 1);
  EXPECT_EQ(oracle::distinct_ids(pair), 1u);
}

TEST(InstanceCodec, RejectsWrongMaxvalAndTruncation) {
  EXPECT_THROW(decode_instance_map(pgm8(1, 1, {3})), FormatError);
  EXPECT_THROW(decode_instance_map(pgm16(2, 1, {0, 1, 0})), FormatError);
}

TEST(InstanceCodec, RoundTrips) {
  Rng rng(11);
  InstanceMap m(13, 9);
  for (auto& v : m.pixels()) v = static_cast<std::uint16_t>(rng.below(65536));
  const auto bytes = encode_instance_map(m);
  EXPECT_EQ(decode_instance_map(bytes), m);
  EXPECT_EQ(encode_instance_map(decode_instance_map(bytes)), bytes);
}

TEST(Dots, ParsesAndFormats) {
  EXPECT_EQ(parse_dots("x,y\n3,4\n"), (DotSet{{3, 4}}));
  EXPECT_TRUE(parse_dots("x,y\n").empty());
  const DotSet d{{0, 0}, {5, 1}, {2, 9}};
  EXPECT_EQ(parse_dots(format_dots(d)), d);
  EXPECT_EQ(format_dots(d), "x,y\n0,0\n5,1\n2,9\n");
}

TEST(Dots, ReportsLineOfBadToken) {
  try {
    parse_dots("x,y\n3,a\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_dots("a,b\n1,2\n"), FormatError);
  EXPECT_THROW(parse_dots("x,y\n1,2\n1,2\n"), FormatError);
}

TEST(Dots, BoundsCheckIsSeparate) {
  const DotSet d = parse_dots("x,y\n10,0\n");
  EXPECT_THROW(check_dots_in_bounds(d, 10, 10), FormatError);
  EXPECT_NO_THROW(check_dots_in_bounds(d, 11, 1));
}

TEST(Rng, StreamIsFixed) {
  // splitmix64 seeding of xoshiro256**; first outputs for seed 0
  Rng a(0), b(0);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  std::uint64_t s = 0;
  EXPECT_EQ(Rng::splitmix64(s), 0xe220a8397b1dcdafULL);
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const int k = r.range(3, 7);
    EXPECT_GE(k, 3);
    EXPECT_LE(k, 7);
  }
}

}  // namespace
}  // namespace berrycount
