#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sdiar/annotation.hpp"
#include "sdiar/error.hpp"
#include "test_support.hpp"

using namespace sdiar;

TEST_CASE("RTTM writes three decimals and reads back") {
  const Annotation a{"call_1", {{0.0, 1.25, "spk0"}, {1.25, 3.5, "spk1"}}};
  std::ostringstream out;
  write_rttm(out, a);
  CHECK(out.str() ==
        "SPEAKER call_1 1 0.000 1.250 <NA> <NA> spk0 <NA> <NA>\n"
        "SPEAKER call_1 1 1.250 2.250 <NA> <NA> spk1 <NA> <NA>\n");
  std::istringstream in(";; comment\n" + out.str() + "LEXEME x 1 0 1 a b c d e\n");
  const auto m = read_rttm(in);
  REQUIRE(m.count("call_1") == 1);
  const Annotation& b = m.at("call_1");
  REQUIRE(b.turns.size() == 2);
  CHECK(b.turns[1].start == 1.25);
  CHECK(b.turns[1].end == 3.5);
  CHECK(b.turns[1].speaker == "spk1");
}

TEST_CASE("RTTM groups recordings and rejects short lines") {
  std::istringstream in(
      "SPEAKER a 1 0 1 <NA> <NA> x <NA> <NA>\n"
      "SPEAKER b 1 2 1 <NA> <NA> y <NA> <NA>\n");
  CHECK(read_rttm(in).size() == 2);
  std::istringstream bad("SPEAKER a 1 0\n");
  CHECK_THROWS_AS(read_rttm(bad), FormatError);
  std::istringstream nan("SPEAKER a 1 zero 1 <NA> <NA> x <NA> <NA>\n");
  CHECK_THROWS_AS(read_rttm(nan), FormatError);
}

TEST_CASE("turn CSV with and without header") {
  std::istringstream with("start,end,speaker\n0,1.5,A\n1.5,3,B\n");
  const Annotation a = read_turn_csv(with, "r");
  REQUIRE(a.turns.size() == 2);
  CHECK(a.turns[0].speaker == "A");
  std::istringstream without("0,1,A\n");
  CHECK(read_turn_csv(without, "r").turns.size() == 1);
  std::ostringstream out;
  write_turn_csv(out, a);
  std::istringstream again(out.str());
  CHECK(read_turn_csv(again, "r").turns[1].end == 3.0);
}

TEST_CASE("annotation files dispatch on extension") {
  test::TempDir dir("ann");
  const Annotation a{"conv", {{0, 1, "A"}}};
  write_rttm(dir.file("x.rttm"), a);
  CHECK(read_annotation_file(dir.file("x.rttm")).count("conv") == 1);
  {
    std::ofstream(dir.file("conv2.csv")) << "start,end,speaker\n0,1,A\n";
  }
  CHECK(read_annotation_file(dir.file("conv2.csv")).count("conv2") == 1);
}

TEST_CASE("validation") {
  CHECK_THROWS_AS((Annotation{"r", {{1, 1, "A"}}}.validate()), DataError);
  CHECK_THROWS_AS((Annotation{"r", {{0, 2, "A"}, {1, 3, "A"}}}.validate()), DataError);
  const Annotation touching{"r", {{0, 1, "A"}, {1, 2, "A"}}};
  CHECK_NOTHROW(touching.validate(true));
  const Annotation cross{"r", {{0, 2, "A"}, {1, 3, "B"}}};
  CHECK(cross.has_cross_speaker_overlap());
  CHECK_NOTHROW(cross.validate());
  CHECK_THROWS_AS(cross.validate(true), DataError);
  CHECK(cross.speakers() == std::vector<std::string>{"A", "B"});
}
