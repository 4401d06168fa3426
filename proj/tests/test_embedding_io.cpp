#include <cstring>
#include <sstream>

#include "doctest.h"
#include "sdiar/embedding_io.hpp"
#include "sdiar/error.hpp"
#include "test_support.hpp"

using namespace sdiar;

namespace {

EmbeddingSet sample_set(bool timed) {
  EmbeddingSet s;
  s.recording_id = "rec-7";
  s.source_tag = "synthetic";
  s.vectors = Matrix<float>{{1.5f, -2.0f, 0.25f}, {0.0f, 3.0e-8f, -1e6f}};
  if (timed) s.timings = {{0.0, 0.2}, {0.2, 0.4}};
  return s;
}

std::string encode(const EmbeddingSet& s) {
  std::ostringstream out(std::ios::binary);
  write_embeddings(s, out);
  return out.str();
}

EmbeddingSet decode(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return read_embeddings(in);
}

FormatError::Kind failure(const std::string& bytes) {
  try {
    decode(bytes);
  } catch (const FormatError& e) {
    return e.kind();
  }
  FAIL("expected FormatError");
  return FormatError::Kind::kInvalid;
}

}  // namespace

TEST_CASE("SDEB golden bytes") {
  EmbeddingSet s;
  s.recording_id = "r";
  s.source_tag = "t";
  s.vectors = Matrix<float>{{1.0f, -0.5f}};
  s.timings = {{0.5, 1.25}};

  const unsigned char expected[] = {
      'S', 'D', 'E', 'B', 0x01, 0x01,                  // magic, version, flags
      0x02, 0x00, 0x00, 0x00,                          // dim
      0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,  // n
      0x01, 0x00, 0x00, 0x00, 'r',                     // recording id
      0x01, 0x00, 0x00, 0x00, 't',                     // source tag
      0x00, 0x00, 0x80, 0x3f,                          // 1.0f
      0x00, 0x00, 0x00, 0xbf,                          // -0.5f
      0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xe0, 0x3f,  // 0.5
      0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xf4, 0x3f,  // 1.25
  };
  const std::string bytes = encode(s);
  REQUIRE(bytes.size() == sizeof(expected));
  CHECK(std::memcmp(bytes.data(), expected, sizeof(expected)) == 0);
  CHECK(decode(bytes) == s);
}

TEST_CASE("SDEB roundtrip with and without timings") {
  for (bool timed : {true, false}) {
    const EmbeddingSet s = sample_set(timed);
    const std::string bytes = encode(s);
    const EmbeddingSet back = decode(bytes);
    CHECK(back == s);
    CHECK(encode(back) == bytes);
  }
}

TEST_CASE("SDEB roundtrip of random sets is bit-exact") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    EmbeddingSet s;
    s.recording_id = "random-" + std::to_string(seed);
    s.source_tag = "synthetic";
    s.vectors = test::random_matrix(17, 9, seed, 100.0).cast<float>();
    const EmbeddingSet back = decode(encode(s));
    CHECK(std::memcmp(back.vectors.data(), s.vectors.data(), s.vectors.size() * sizeof(float)) == 0);
  }
}

TEST_CASE("SDEB empty set") {
  EmbeddingSet s;
  s.recording_id = "empty";
  s.vectors = Matrix<float>(0, 4);
  const EmbeddingSet back = decode(encode(s));
  CHECK(back.n() == 0);
  CHECK(back.dim() == 4);
}

TEST_CASE("SDEB reader failures") {
  const std::string bytes = encode(sample_set(true));
  std::string magic = bytes;
  magic[1] = 'X';
  CHECK(failure(magic) == FormatError::Kind::kBadMagic);
  std::string version = bytes;
  version[4] = 2;
  CHECK(failure(version) == FormatError::Kind::kUnknownVersion);
  for (std::size_t cut : {std::size_t{3}, std::size_t{12}, bytes.size() - 1}) {
    CHECK(failure(bytes.substr(0, cut)) == FormatError::Kind::kTruncated);
  }
  CHECK(failure(bytes + '\0') == FormatError::Kind::kInvalid);

  // Header claims far more rows than the stream holds.
  std::string lying = bytes;
  const std::uint64_t huge = 1ull << 40;
  std::memcpy(lying.data() + 10, &huge, 8);
  CHECK(failure(lying) == FormatError::Kind::kTruncated);
}

TEST_CASE("timing and Whisper width validation") {
  EmbeddingSet s = sample_set(true);
  s.timings[1] = {0.1, 0.3};
  CHECK_THROWS_AS(s.validate(), DataError);
  s = sample_set(true);
  s.timings.pop_back();
  CHECK_THROWS_AS(encode(s), DataError);
  s = sample_set(false);
  s.source_tag = "whisper-tiny";
  CHECK_THROWS_AS(s.validate(), DataError);
  CHECK(whisper_embedding_dim("tiny") == 384u);
  CHECK(whisper_embedding_dim("large") == 1280u);
  CHECK_FALSE(whisper_embedding_dim("huge").has_value());
}

TEST_CASE("extractor-side fixture parses in the primary reader") {
  const EmbeddingSet s = read_embeddings(std::string(SDIAR_TEST_DATA_DIR) + "/whisper_tiny_3x384.sdeb");
  CHECK(s.recording_id == "clip01");
  CHECK(s.source_tag == "whisper-tiny");
  REQUIRE(s.n() == 3);
  REQUIRE(s.dim() == 384);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 384; ++j) {
      CHECK(s.vectors(i, j) == static_cast<float>(static_cast<int>((i * 384 + j) % 97) - 48) / 64.0f);
    }
    CHECK(s.timings[i].start == 0.2 * static_cast<double>(i));
    CHECK(s.timings[i].end == 0.2 * static_cast<double>(i + 1));
  }
}
