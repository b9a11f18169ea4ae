#include "roadsentry/detection_io.hpp"
#include "roadsentry/error.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

namespace roadsentry {
namespace {

std::vector<FrameDetections> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_detection_stream(in);
}

TEST(Parse, SchemaExample) {
  const auto frames =
      parse(R"({"frame":0,"detections":[{"bbox":[100,200,50,40],"class":"car","conf":0.93}]})" "\n");
  ASSERT_EQ(frames.size(), 1u);
  EXPECT_EQ(frames[0].frame_index, 0);
  ASSERT_EQ(frames[0].detections.size(), 1u);
  const Detection& d = frames[0].detections[0];
  EXPECT_EQ(d.box, (BBox{100, 200, 50, 40}));
  EXPECT_EQ(d.class_label, "car");
  EXPECT_DOUBLE_EQ(d.confidence, 0.93);
  EXPECT_DOUBLE_EQ(bbox_area(d.box), 2000);
}

TEST(Parse, EmptyAndBlankLines) {
  EXPECT_TRUE(parse("").empty());
  const auto f = parse("\n{\"frame\":2,\"detections\":[]}\n\n{\"frame\":7,\"detections\":[]}\n");
  ASSERT_EQ(f.size(), 2u);
  EXPECT_EQ(f[1].frame_index, 7);
}

TEST(Parse, NonMonotonicReportsLine) {
  try {
    parse("{\"frame\":5,\"detections\":[]}\n{\"frame\":3,\"detections\":[]}\n");
    FAIL();
  } catch (const NonMonotonicFrame& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse("{\"frame\":5,\"detections\":[]}\n{\"frame\":5,\"detections\":[]}\n"), NonMonotonicFrame);
}

TEST(Parse, MalformedRecords) {
  const char* bad[] = {
      "not json",
      R"({"frame":-1,"detections":[]})",
      R"({"frame":1.5,"detections":[]})",
      R"({"detections":[]})",
      R"({"frame":0})",
      R"({"frame":0,"detections":[{"bbox":[0,0,0,5],"class":"car","conf":0.5}]})",
      R"({"frame":0,"detections":[{"bbox":[0,0,5],"class":"car","conf":0.5}]})",
      R"({"frame":0,"detections":[{"bbox":[0,0,5,5],"class":"","conf":0.5}]})",
      R"({"frame":0,"detections":[{"bbox":[0,0,5,5],"class":"car","conf":1.5}]})",
      R"({"frame":0,"detections":[{"bbox":[0,0,5,5],"class":"car"}]})",
      R"({"frame":0,"detections":[{"bbox":["a",0,5,5],"class":"car","conf":0.5}]})",
  };
  for (const char* line : bad) {
    try {
      parse(std::string("\n") + line + "\n");
      ADD_FAILURE() << line;
    } catch (const MalformedRecord& e) {
      EXPECT_EQ(e.line(), 2u) << line;
    }
  }
}

TEST(BoxArithmetic, AreaAndCentre) {
  EXPECT_DOUBLE_EQ(bbox_area({0, 0, 20, 30}), 600);
  EXPECT_DOUBLE_EQ(bbox_area({0, 0, 1, 1}), 1);
  EXPECT_NEAR(bbox_area({50, 60, 663.9, 663.3}), 440364.87, 1e-6);
  EXPECT_EQ(bbox_center({10, 20, 30, 40}), PixelPoint(25, 40));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.1, 500), us(0.1, 10);
  for (int i = 0; i < 1000; ++i) {
    const BBox b{u(rng), u(rng), u(rng), u(rng)};
    const double s = us(rng);
    ASSERT_GT(bbox_area(b), 0);
    ASSERT_NEAR(bbox_area({b.x, b.y, b.w * s, b.h * s}), s * s * bbox_area(b), 1e-9 * s * s * bbox_area(b));
  }
}

FrameDetections sample_frame() {
  return {3,
          {{{0, 0, 10, 10}, "car", 0.4},
           {{5, 5, 10, 10}, "car", 0.6},
           {{1, 1, 2, 2}, "dog", 0.9},
           {{2, 2, 3, 3}, "person", 0.5}}};
}

TEST(Filter, ConfidenceClassesAndIdempotence) {
  const FrameDetections f = sample_frame();
  const FrameDetections kept = filter_detections(f, 0.5, default_allowed_classes());
  ASSERT_EQ(kept.detections.size(), 2u);
  EXPECT_DOUBLE_EQ(kept.detections[0].confidence, 0.6);
  EXPECT_EQ(kept.detections[1].class_label, "person");
  EXPECT_EQ(filter_detections(kept, 0.5, default_allowed_classes()), kept);
  EXPECT_TRUE(filter_detections(f, 0.0, {}).detections.empty());
  EXPECT_EQ(filter_detections(f, 0.0, {"car", "dog", "person"}), f);
}

TEST(Stream, RoundTrip) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 1000), uw(0.5, 300), uc(0, 1);
  const char* classes[] = {"car", "truck", "person", "traffic light"};
  std::vector<FrameDetections> frames;
  long idx = 0;
  for (int i = 0; i < 50; ++i) {
    idx += 1 + static_cast<long>(u(rng)) % 3;
    FrameDetections f{idx, {}};
    for (int k = 0; k < i % 4; ++k) {
      f.detections.push_back({{u(rng), u(rng), uw(rng), uw(rng)}, classes[k], uc(rng)});
    }
    frames.push_back(std::move(f));
  }
  std::ostringstream out;
  write_detection_stream(out, frames);
  EXPECT_EQ(parse(out.str()), frames);
  EXPECT_EQ(out.str().substr(0, 9), "{\"frame\":");
}

}  // namespace
}  // namespace roadsentry
