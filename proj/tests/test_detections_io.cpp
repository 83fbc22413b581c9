#include <doctest.h>

#include <random>
#include <string>

#include "socdist/detections_io.hpp"
#include "socdist/error.hpp"

using namespace socdist;

namespace {

Detection det(double x1, double y1, double x2, double y2, int cls, double score) {
  return Detection{{x1, y1, x2, y2}, cls, score, std::nullopt};
}

Frame random_frame(std::mt19937_64& rng, std::int64_t index) {
  std::uniform_int_distribution<int> count(0, 6), cls(0, 3), dim(50, 2000);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Frame f;
  f.frame_index = index;
  if (unit(rng) < 0.5) f.timestamp_s = unit(rng) * 100.0;
  f.image_width = dim(rng);
  f.image_height = dim(rng);
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const double x1 = unit(rng) * (f.image_width - 1);
    const double y1 = unit(rng) * (f.image_height - 1);
    const double x2 = x1 + 0.5 + unit(rng) * (f.image_width - x1 - 0.5);
    const double y2 = y1 + 0.5 + unit(rng) * (f.image_height - y1 - 0.5);
    Detection d = det(x1, y1, x2, y2, cls(rng), unit(rng));
    if (unit(rng) < 0.3) d.mask = "RLE:" + std::to_string(i);
    f.detections.push_back(d);
  }
  return f;
}

}  // namespace

TEST_SUITE("detections_io") {
  TEST_CASE("single well-formed record") {
    const auto parsed = parse_stream_string(
        R"({"frame": 0, "t": null, "w": 640, "h": 480, "dets": [{"bbox": [10,20,60,220], "class": 1, "score": 0.95, "mask": null}]})"
        "\n");
    REQUIRE(parsed.frames.size() == 1);
    const Frame& f = parsed.frames[0];
    CHECK(f.frame_index == 0);
    CHECK_FALSE(f.timestamp_s.has_value());
    REQUIRE(f.detections.size() == 1);
    CHECK(f.detections[0].bbox == BoundingBox{10, 20, 60, 220});
    CHECK(f.detections[0].score == 0.95);
    CHECK(parsed.rejections.empty());
  }

  TEST_CASE("empty input yields no frames") {
    CHECK(parse_stream_string("").frames.empty());
    CHECK(parse_stream_string("\n\n").frames.empty());
  }

  TEST_CASE("non-monotonic frame index names the line") {
    const std::string text =
        R"({"frame": 5, "w": 10, "h": 10, "dets": []})"
        "\n"
        R"({"frame": 3, "w": 10, "h": 10, "dets": []})"
        "\n";
    try {
      parse_stream_string(text);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()) == "non-monotonic frame index at line 2");
    }
  }

  TEST_CASE("repeated frame index is rejected") {
    const std::string line = R"({"frame": 1, "w": 10, "h": 10, "dets": []})";
    CHECK_THROWS_AS(parse_stream_string(line + "\n" + line + "\n"), ParseError);
  }

  TEST_CASE("malformed lines report their line number") {
    const std::string ok = R"({"frame": 0, "w": 10, "h": 10, "dets": []})";
    const char* bad[] = {
        "not json",
        R"({"frame": 1, "w": 10, "h": 10})",
        R"({"frame": 1, "w": 0, "h": 10, "dets": []})",
        R"({"frame": 1.5, "w": 10, "h": 10, "dets": []})",
        R"({"frame": 1, "w": 10, "h": 10, "dets": [{"bbox": [1,2,3], "class": 1, "score": 1}]})",
        R"({"frame": 1, "w": 10, "h": 10, "dets": [{"bbox": [1,2,3,4], "score": 1}]})",
        R"({"frame": 1, "w": 10, "h": 10, "dets": [{"bbox": [1,2,3,4], "class": 1, "score": 1, "mask": 7}]})",
        R"([1,2,3])",
    };
    for (const char* b : bad) {
      CAPTURE(b);
      try {
        parse_stream_string(ok + "\n" + b + "\n");
        FAIL("expected ParseError");
      } catch (const ParseError& e) {
        CHECK(e.line() == 2);
      }
    }
  }

  TEST_CASE("degenerate boxes are rejected per record with frame and index") {
    const auto parsed = parse_stream_string(
        R"({"frame": 7, "w": 100, "h": 100, "dets": [)"
        R"({"bbox": [10,10,20,20], "class": 1, "score": 0.9},)"
        R"({"bbox": [30,10,30,20], "class": 1, "score": 0.9},)"
        R"({"bbox": [50,10,40,20], "class": 1, "score": 0.9},)"
        R"({"bbox": [10,10,20,20], "class": 1, "score": 1.5}]})");
    REQUIRE(parsed.frames.size() == 1);
    CHECK(parsed.frames[0].detections.size() == 1);
    REQUIRE(parsed.rejections.size() == 3);
    CHECK(parsed.rejections[0].frame_index == 7);
    CHECK(parsed.rejections[0].det_index == 1);
    CHECK(parsed.rejections[1].det_index == 2);
    CHECK(parsed.rejections[2].det_index == 3);
    CHECK(parsed.rejections[0].line == 1);
  }

  TEST_CASE("boxes past the border are clamped, collapsed boxes rejected") {
    const auto parsed = parse_stream_string(
        R"({"frame": 0, "w": 100, "h": 80, "dets": [)"
        R"({"bbox": [-5,-2,120,90], "class": 1, "score": 0.9},)"
        R"({"bbox": [110,10,130,20], "class": 1, "score": 0.9}]})");
    REQUIRE(parsed.frames[0].detections.size() == 1);
    CHECK(parsed.frames[0].detections[0].bbox == BoundingBox{0, 0, 100, 80});
    REQUIRE(parsed.rejections.size() == 1);
    CHECK(parsed.rejections[0].det_index == 1);
  }

  TEST_CASE("mask is carried through untouched") {
    const auto parsed = parse_stream_string(
        R"({"frame": 0, "w": 100, "h": 80, "dets": [{"bbox": [1,1,5,5], "class": 1, "score": 0.9, "mask": "3 4 5"}]})");
    CHECK(parsed.frames[0].detections[0].mask == std::optional<std::string>("3 4 5"));
  }

  TEST_CASE("parse after serialize is the identity on valid frames") {
    std::mt19937_64 rng(12345);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<Frame> frames;
      std::string text;
      std::int64_t index = 0;
      for (int i = 0; i < 5; ++i) {
        index += 1 + static_cast<std::int64_t>(rng() % 3);
        frames.push_back(random_frame(rng, index));
        text += serialize_frame(frames.back()) + "\n";
      }
      const auto parsed = parse_stream_string(text);
      CHECK(parsed.rejections.empty());
      REQUIRE(parsed.frames == frames);
    }
  }

  TEST_CASE("filter_people examples") {
    Frame f;
    f.image_width = 100;
    f.image_height = 100;
    f.detections = {det(0, 0, 10, 10, 1, 0.95), det(0, 0, 10, 10, 3, 0.99),
                    det(0, 0, 10, 10, 1, 0.40)};
    const Frame kept = filter_people(f, 1, 0.7);
    REQUIRE(kept.detections.size() == 1);
    CHECK(kept.detections[0] == f.detections[0]);

    CHECK(filter_people(f, 1, 0.999).detections.empty());

    Frame people = f;
    people.detections = {f.detections[0], f.detections[2]};
    CHECK(filter_people(people, 1, 0.0) == people);
  }

  TEST_CASE("filter_people is an idempotent order-preserving subsequence") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
      const Frame f = random_frame(rng, trial);
      const Frame copy = f;
      const double min_score = std::uniform_real_distribution<double>(0, 1)(rng);
      const Frame once = filter_people(f, 1, min_score);
      CHECK(f == copy);
      CHECK(filter_people(once, 1, min_score) == once);
      std::size_t j = 0;
      for (const auto& d : f.detections) {
        if (j < once.detections.size() && d == once.detections[j]) ++j;
      }
      CHECK(j == once.detections.size());
      for (const auto& d : once.detections) {
        CHECK(d.class_id == 1);
        CHECK(d.score >= min_score);
      }
    }
  }
}
