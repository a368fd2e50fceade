#include <gtest/gtest.h>

#include "support/support.hpp"
#include "teleop/recorder/camera.hpp"
#include "teleop/recorder/storage.hpp"
#include "teleop/recorder/video.hpp"
#include "teleop/topics.hpp"

namespace teleop {
namespace {

std::shared_ptr<const Image> solid(int w, int h, uint8_t v) {
  auto img = std::make_shared<Image>();
  img->width = w;
  img->height = h;
  img->rgb.assign(static_cast<std::size_t>(w * h * 3), v);
  return img;
}

void write_all(const std::filesystem::path& base, const EncodedFiles& files) {
  FilesystemStorage fs;
  for (const auto& [rel, bytes] : files) fs.write_file(base / rel, bytes);
}

TEST(Video, ModeNames) {
  EXPECT_EQ(parse_video_mode("mp4"), VideoMode::mp4);
  EXPECT_EQ(parse_video_mode(to_string(VideoMode::image_sequence)), VideoMode::image_sequence);
  EXPECT_THROW(parse_video_mode("gif"), std::invalid_argument);
}

TEST(Video, Mp4HasOneFramePerImage) {
  test::TempDir dir("mp4");
  std::vector<std::shared_ptr<const Image>> frames;
  for (int i = 0; i < 12; ++i) frames.push_back(solid(64, 48, static_cast<uint8_t>(i * 20)));
  VideoConfig c;
  const EncodedFiles files = encode_video(frames, c, "v/ep");
  ASSERT_EQ(files.size(), 1u);
  EXPECT_EQ(files[0].first, std::filesystem::path("v/ep.mp4"));
  write_all(dir.path(), files);
  EXPECT_EQ(count_video_frames(dir / "v/ep"), 12u);
}

TEST(Video, ImageSequenceIsLosslessAndDeterministic) {
  test::TempDir dir("seq");
  std::vector<std::shared_ptr<const Image>> frames{solid(8, 6, 1), solid(8, 6, 200)};
  VideoConfig c;
  c.mode = VideoMode::image_sequence;
  const EncodedFiles a = encode_video(frames, c, "ep");
  EXPECT_EQ(a, encode_video(frames, c, "ep"));
  ASSERT_EQ(a.size(), 2u);
  write_all(dir.path(), a);
  EXPECT_EQ(count_video_frames(dir / "ep"), 2u);
  const Image back = load_image(dir.path() / a[1].first);
  EXPECT_EQ(back.rgb, frames[1]->rgb);
}

TEST(Video, RejectsBadInput) {
  VideoConfig c;
  EXPECT_THROW(encode_video({}, c, "x"), VideoError);
  EXPECT_THROW(encode_video({solid(8, 6, 0), solid(4, 4, 0)}, c, "x"), VideoError);
  test::TempDir dir("bad");
  EXPECT_FALSE(count_video_frames(dir / "missing").has_value());
  std::ofstream(dir / "junk.mp4") << "not a video";
  EXPECT_THROW(count_video_frames(dir / "junk"), VideoError);
  EXPECT_THROW(load_image(dir / "nothing.png"), VideoError);
}

TEST(Camera, ConfigValidation) {
  CameraConfig c;
  EXPECT_NO_THROW(c.validate());
  c.width = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.rate_hz = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.view = "side";
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Camera, SyntheticRenderIsDeterministicAndTracksTheArm) {
  CameraConfig c;
  c.seed = 9;
  RobotState s;
  s.ee_position = {0.4, 0.0, 0.25};
  const Image a = render_synthetic(c, {}, s);
  EXPECT_EQ(a.rgb, render_synthetic(c, {}, s).rgb);
  EXPECT_EQ(a.bytes(), static_cast<std::size_t>(c.width * c.height * 3));
  RobotState moved = s;
  moved.ee_position.y = 0.2;
  EXPECT_NE(a.rgb, render_synthetic(c, {}, moved).rgb);
  RobotState closed = s;
  closed.gripper_closed = true;
  EXPECT_NE(a.rgb, render_synthetic(c, {}, closed).rgb);
  CameraConfig other = c;
  other.seed = 10;
  EXPECT_NE(a.rgb, render_synthetic(other, {}, s).rgb);
}

TEST(Camera, PublishesAtRateAndFreezes) {
  VirtualClock clock;
  Bus bus(clock);
  CameraConfig c;
  c.rate_hz = 30;
  CameraSource cam(bus, "/l", c);
  Subscription sub = bus.subscribe(cam.topic(), QosProfile::keep_last(256));
  for (int ms = 0; ms < 1000; ++ms) {
    cam.step(clock.now());
    clock.advance(std::chrono::milliseconds(1));
  }
  EXPECT_EQ(sub.drain().size(), 30u);
  cam.set_frozen(true);
  for (int ms = 0; ms < 200; ++ms) {
    cam.step(clock.now());
    clock.advance(std::chrono::milliseconds(1));
  }
  EXPECT_EQ(sub.pending(), 0u);
  EXPECT_EQ(cam.topic().full(), "/l/phone2act/camera/cam_front");
}

TEST(Camera, ImageSequenceCyclesAndResizes) {
  test::TempDir dir("imgs");
  FilesystemStorage fs;
  for (int i = 0; i < 3; ++i) {
    fs.write_file(dir / ("f" + std::to_string(i) + ".png"), encode_png(*solid(32, 16, static_cast<uint8_t>(50 * i))));
  }
  VirtualClock clock;
  Bus bus(clock);
  CameraConfig c;
  c.producer = CameraProducer::image_sequence;
  c.directory = dir.path();
  c.width = 16;
  c.height = 8;
  c.rate_hz = 10;
  CameraSource cam(bus, "", c);
  Subscription sub = bus.subscribe(cam.topic(), QosProfile::keep_last(16));
  for (int ms = 0; ms < 400; ++ms) {
    cam.step(clock.now());
    clock.advance(std::chrono::milliseconds(1));
  }
  auto frames = sub.drain();
  ASSERT_EQ(frames.size(), 4u);
  EXPECT_EQ(frames[0].get<CameraFrame>().image->width, 16);
  EXPECT_EQ(frames[3].get<CameraFrame>().image->rgb, frames[0].get<CameraFrame>().image->rgb);
  EXPECT_NE(frames[1].get<CameraFrame>().image->rgb, frames[0].get<CameraFrame>().image->rgb);
}

TEST(Storage, FaultyAndRecordingWrappers) {
  test::TempDir dir("st");
  FilesystemStorage fs;
  VirtualClock clock(std::chrono::seconds(1));
  RecordingStorage rec(fs, clock);
  FaultyStorage faulty(rec, [](StorageOp op, const std::filesystem::path& p) {
    return op == StorageOp::rename && p.filename() == "b";
  });
  const Bytes data{1, 2, 3};
  faulty.write_file(dir / "sub" / "a", data);
  EXPECT_EQ(faulty.read_file(dir / "sub" / "a"), data);
  EXPECT_THROW(faulty.rename(dir / "sub" / "a", dir / "b"), StorageError);
  EXPECT_EQ(faulty.faults(), 1u);
  faulty.rename(dir / "sub" / "a", dir / "c");
  EXPECT_TRUE(fs.exists(dir / "c"));
  faulty.remove_all(dir / "c");
  EXPECT_FALSE(fs.exists(dir / "c"));
  const auto calls = rec.calls();
  ASSERT_EQ(calls.size(), 3u);
  EXPECT_EQ(calls[0].op, StorageOp::write);
  EXPECT_EQ(calls[1].op, StorageOp::rename);
  EXPECT_EQ(calls[2].op, StorageOp::remove);
  EXPECT_EQ(calls[0].time, std::chrono::seconds(1));
  EXPECT_FALSE(fs.read_file(dir / "nope").has_value());
}

}  // namespace
}  // namespace teleop
