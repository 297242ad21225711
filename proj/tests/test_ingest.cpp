#include <gtest/gtest.h>

#include <filesystem>

#include "facebench/adapter.hpp"
#include "facebench/errors.hpp"
#include "facebench/ingest.hpp"
#include "temp_dir.hpp"

using namespace facebench;
namespace ft = facebench::testing;
namespace fs = std::filesystem;
using facebench::testing::TempDir;
using facebench::testing::write_text;

namespace {

// Writes frames 1..3 like a real extractor would, plus a log of its launches.
const char* kFakeExtractor =
    "test -f {input} && mkdir -p {outdir} && echo run >> {outdir}/../launches && "
    "for i in 3 1 2; do printf x > {outdir}/$(printf {pattern} $i).png; done";

IngestOptions options_in(const TempDir& dir) {
  write_text(dir / "clip.mp4", "not really a video");
  IngestOptions o;
  o.video_path = dir / "clip.mp4";
  o.extractor_command = kFakeExtractor;
  o.output_dir = dir / "frames";
  return o;
}

}  // namespace

TEST(IngestFrames, ThreeFramesInNumericOrder) {
  TempDir dir;
  const auto m = ingest_frames(options_in(dir));
  ASSERT_EQ(m.frames.size(), 3u);
  EXPECT_EQ(m.frames[0], (ManifestEntry{"000001", "frame_000001.png"}));
  EXPECT_EQ(m.frames[2], (ManifestEntry{"000003", "frame_000003.png"}));
  EXPECT_EQ(m.corpus_root, dir / "frames");
}

TEST(IngestFrames, ReuseSkipsExtractorAndReproducesManifest) {
  TempDir dir;
  auto o = options_in(dir);
  const std::string first = format_manifest(ingest_frames(o));
  o.reuse = true;
  o.extractor_command = "exit 9 {input} {outdir} {pattern}";
  const std::string second = format_manifest(ingest_frames(o));
  EXPECT_EQ(first, second);
  EXPECT_EQ(ft::read_text(dir / "launches"), "run\n");
}

TEST(IngestFrames, ExtractorFailureCarriesDiagnostics) {
  TempDir dir;
  auto o = options_in(dir);
  o.extractor_command = "echo codec missing >&2; exit 4 # {input} {outdir} {pattern}";
  try {
    ingest_frames(o);
    FAIL() << "expected ExtractorFailed";
  } catch (const ExtractorFailed& e) {
    EXPECT_EQ(e.exit_code(), 4);
    EXPECT_EQ(e.diagnostics(), "codec missing\n");
  }
}

TEST(IngestFrames, NoFramesProduced) {
  TempDir dir;
  auto o = options_in(dir);
  o.extractor_command = "mkdir -p {outdir} # {input} {pattern}";
  EXPECT_THROW(ingest_frames(o), NoFramesProduced);
}

TEST(IngestFrames, TemplateAndInputValidation) {
  TempDir dir;
  auto o = options_in(dir);
  o.extractor_command = "extract {input} {outdir}";
  EXPECT_THROW(ingest_frames(o), ConfigError);

  o = options_in(dir);
  o.fps = 5.0;
  EXPECT_THROW(ingest_frames(o), ConfigError);  // {fps} missing

  o = options_in(dir);
  o.video_path = dir / "absent.mp4";
  EXPECT_THROW(ingest_frames(o), ConfigError);
}

TEST(IngestFrames, FpsIsSubstituted) {
  TempDir dir;
  auto o = options_in(dir);
  o.fps = 2.5;
  o.extractor_command = std::string("test {fps} = 2.5 && ") + kFakeExtractor;
  EXPECT_EQ(ingest_frames(o).frames.size(), 3u);
}

TEST(ScanFrameDirectory, IgnoresOtherFilesAndRejectsCollisions) {
  TempDir dir;
  for (const char* name : {"frame_000010.jpg", "frame_000002.jpg", "frame_12.jpg", "notes.txt", "frame_0000001.png"}) {
    write_text(dir / name, "x");
  }
  const auto m = scan_frame_directory(dir.path());
  ASSERT_EQ(m.frames.size(), 3u);
  EXPECT_EQ(m.frames[0].frame_id, "0000001");
  EXPECT_EQ(m.frames[1].frame_id, "000002");
  EXPECT_EQ(m.frames[2].frame_id, "000010");

  write_text(dir / "frame_000002.png", "x");
  EXPECT_THROW(scan_frame_directory(dir.path()), ConfigError);
  EXPECT_TRUE(scan_frame_directory(dir / "nothing-here").frames.empty());
}

TEST(ScanImageDirectory, RecursiveSortedRelativeIds) {
  TempDir dir;
  fs::create_directories(dir / "videoB");
  fs::create_directories(dir / "videoA");
  write_text(dir / "videoB/f1.PNG", "x");
  write_text(dir / "videoA/f2.jpg", "x");
  write_text(dir / "videoA/readme.md", "x");
  const auto m = scan_image_directory(dir.path());
  ASSERT_EQ(m.frames.size(), 2u);
  EXPECT_EQ(m.frames[0], (ManifestEntry{"videoA/f2.jpg", "videoA/f2.jpg"}));
  EXPECT_EQ(m.frames[1].frame_id, "videoB/f1.PNG");
}
