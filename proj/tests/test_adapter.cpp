#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "facebench/adapter.hpp"
#include "facebench/errors.hpp"
#include "facebench/formats.hpp"
#include "temp_dir.hpp"

using namespace facebench;
namespace fs = std::filesystem;
using facebench::testing::read_text;
using facebench::testing::TempDir;
using facebench::testing::write_text;

namespace {

const std::string kData = FACEBENCH_TEST_DATA;

RunManifest manifest_from(const std::string& text, const fs::path& root) {
  std::istringstream in(text);
  return parse_manifest(in, root);
}

// The fixture's annotated frames; videoA/f05 gets no detections from the replay
// file and videoC/f11 is an extra frame the adapter reports.
std::string fixture_manifest_text() {
  std::string text;
  for (const char* id : {"videoA/f01", "videoA/f02", "videoA/f03", "videoA/f04", "videoA/f05", "videoB/f06",
                         "videoB/f07", "videoB/f08", "videoB/f09", "videoB/f10"}) {
    text += std::string(id) + "\t" + id + ".png\n";
  }
  return text;
}

AdapterConfig replay_config(const fs::path& source) {
  AdapterConfig c;
  c.name = "replay";
  c.command_template = "cp " + source.string() + " {output} # {manifest}";
  c.timeout = std::chrono::seconds(30);
  return c;
}

struct CountingRunner {
  int* launches;
  ProcessResult operator()(const ProcessSpec& spec) const {
    ++*launches;
    return run_shell_command(spec);
  }
};

std::size_t count_files(const fs::path& dir) {
  if (!fs::exists(dir)) return 0;
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) n += e.is_regular_file() || e.is_directory();
  return n;
}

}  // namespace

TEST(Manifest, ParseAndFormat) {
  const auto m = manifest_from("a\timg/a.png\nb c\t/abs/b.png\n", "/root/corpus");
  ASSERT_EQ(m.frames.size(), 2u);
  EXPECT_EQ(m.frames[1], (ManifestEntry{"b c", "/abs/b.png"}));
  EXPECT_EQ(m.resolve(m.frames[0]), fs::path("/root/corpus/img/a.png"));
  EXPECT_EQ(m.resolve(m.frames[1]), fs::path("/abs/b.png"));
  EXPECT_EQ(format_manifest(m), "a\timg/a.png\nb c\t/abs/b.png\n");
  EXPECT_EQ(format_resolved_manifest(m), "a\t/root/corpus/img/a.png\nb c\t/abs/b.png\n");
}

TEST(Manifest, Errors) {
  auto kind_and_line = [](const std::string& text) {
    try {
      manifest_from(text, "/");
    } catch (const ParseError& e) {
      return std::make_pair(e.kind(), e.line());
    }
    return std::make_pair(ParseErrorKind::MalformedBlock, std::size_t{0});
  };
  EXPECT_EQ(kind_and_line("a\tx\nno-tab\n"), std::make_pair(ParseErrorKind::MalformedRow, std::size_t{2}));
  EXPECT_EQ(kind_and_line("a\tx\ty\n"), std::make_pair(ParseErrorKind::MalformedRow, std::size_t{1}));
  EXPECT_EQ(kind_and_line("\tx\n"), std::make_pair(ParseErrorKind::MalformedRow, std::size_t{1}));
  EXPECT_EQ(kind_and_line("a\t\n"), std::make_pair(ParseErrorKind::MalformedRow, std::size_t{1}));
  EXPECT_EQ(kind_and_line("a\tx\nb\ty\na\tz\n"), std::make_pair(ParseErrorKind::DuplicateFrame, std::size_t{3}));
}

TEST(Manifest, LoadUsesOwnDirectoryAsRoot) {
  TempDir dir;
  fs::create_directories(dir / "sub");
  write_text(dir / "sub/m.tsv", "a\timg.png\n");
  const auto m = load_manifest(dir / "sub/m.tsv");
  EXPECT_EQ(m.resolve(m.frames[0]).lexically_normal(), (dir.path() / "sub/img.png").lexically_normal());
  EXPECT_THROW(load_manifest(dir / "missing.tsv"), ConfigError);
}

TEST(AdapterConfig, ParsesKeyValueFile) {
  std::istringstream in(
      "# replay adapter\n"
      "name = mock-1\n"
      "command=python3 run.py --in {manifest} --out {output}\n"
      "workdir=tools\n"
      "timeout_seconds=42\n"
      "env.MODEL=small\n");
  const auto c = parse_adapter_config(in, "/base");
  EXPECT_EQ(c.name, "mock-1");
  EXPECT_EQ(c.command_template, "python3 run.py --in {manifest} --out {output}");
  EXPECT_EQ(c.working_dir, fs::path("/base/tools"));
  EXPECT_EQ(c.timeout, std::chrono::seconds(42));
  ASSERT_EQ(c.env.size(), 1u);
  EXPECT_EQ(c.env[0], std::make_pair(std::string("MODEL"), std::string("small")));
}

TEST(AdapterConfig, Validation) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_adapter_config(in, "/");
  };
  EXPECT_THROW(parse("name=a\ncommand=run {manifest}\n"), ConfigError);
  EXPECT_THROW(parse("name=a\ncommand=run {manifest} {output} {output}\n"), ConfigError);
  EXPECT_THROW(parse("name=../x\ncommand=run {manifest} {output}\n"), ConfigError);
  EXPECT_THROW(parse("name=..\ncommand=run {manifest} {output}\n"), ConfigError);
  EXPECT_THROW(parse("name=a\ncommand=run {manifest} {output}\ncolour=red\n"), ConfigError);
  EXPECT_THROW(parse("name=a\ncommand=run {manifest} {output}\ntimeout_seconds=0\n"), ConfigError);
  EXPECT_THROW(parse("command=run {manifest} {output}\n"), ConfigError);
  EXPECT_THROW(parse("name=a\njust text\n"), ConfigError);
  EXPECT_NO_THROW(parse("name=a\ncommand=run {manifest} {output}\n"));
  EXPECT_THROW(load_adapter_config("/nonexistent/adapter.conf"), ConfigError);
}

TEST(Sha256, KnownDigests) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(RunAdapter, ReplayAdapterReturnsFixture) {
  TempDir dir;
  const auto manifest = manifest_from(fixture_manifest_text(), dir.path());
  const auto run = run_adapter(replay_config(kData + "/fixture10/det.csv"), manifest, {});
  EXPECT_FALSE(run.from_cache);
  EXPECT_EQ(run.missing_frames, std::vector<std::string>{"videoA/f05"});
  EXPECT_EQ(run.unexpected_frames, std::vector<std::string>{"videoC/f11"});

  std::ifstream in(kData + "/fixture10/det.csv");
  const auto fixture = parse_csv_detections(in);
  ASSERT_EQ(run.detections.frames.size(), manifest.frames.size());
  for (std::size_t i = 0; i < manifest.frames.size(); ++i) {
    const auto& got = run.detections.frames[i];
    EXPECT_EQ(got.frame_id, manifest.frames[i].frame_id);
    const FrameDetections* want = fixture.find(got.frame_id);
    if (want == nullptr) {
      EXPECT_TRUE(got.detections.empty());
    } else {
      EXPECT_EQ(got.detections, want->detections);
    }
  }
}

TEST(RunAdapter, AdapterSeesAbsoluteManifest) {
  TempDir dir;
  const auto manifest = manifest_from("a\timg/a.png\n", dir.path());
  AdapterConfig c;
  c.name = "probe";
  c.command_template = "cp {manifest} " + (dir / "seen.tsv").string() + " && printf 'frame_id,x,y,w,h,score\\n' > {output}";
  run_adapter(c, manifest, {});
  EXPECT_EQ(read_text(dir / "seen.tsv"), "a\t" + (dir.path() / "img/a.png").string() + "\n");
}

TEST(RunAdapter, WarmCacheLaunchesNothing) {
  TempDir dir;
  const auto manifest = manifest_from(fixture_manifest_text(), dir.path());
  int launches = 0;
  AdapterRunOptions options;
  options.cache_dir = dir / "cache";
  options.runner = CountingRunner{&launches};
  const auto config = replay_config(kData + "/fixture10/det.csv");

  const auto cold = run_adapter(config, manifest, options);
  EXPECT_EQ(launches, 1);
  EXPECT_FALSE(cold.from_cache);
  const fs::path expected_file =
      dir / "cache" / "replay" / (sha256_hex(format_resolved_manifest(manifest)) + ".csv");
  EXPECT_EQ(cold.cache_file, expected_file);
  ASSERT_TRUE(fs::exists(expected_file));

  const auto warm = run_adapter(config, manifest, options);
  EXPECT_EQ(launches, 1);
  EXPECT_TRUE(warm.from_cache);
  EXPECT_EQ(write_detections(warm.detections, DetectionFormat::Csv),
            write_detections(cold.detections, DetectionFormat::Csv));

  options.use_cache = false;
  run_adapter(config, manifest, options);
  EXPECT_EQ(launches, 2);

  // A different manifest is a different key.
  options.use_cache = true;
  run_adapter(config, manifest_from("videoA/f01\tother.png\n", dir.path()), options);
  EXPECT_EQ(launches, 3);

  // Only published entries remain; no scratch directories are left behind.
  for (const auto& e : fs::directory_iterator(dir / "cache" / "replay")) {
    EXPECT_EQ(e.path().extension(), ".csv") << e.path();
  }
}

TEST(RunAdapter, TimeoutRaisesAdapterFailed) {
  TempDir dir;
  AdapterConfig c;
  c.name = "slow";
  c.command_template = "echo still working >&2; sleep 30; true {manifest} {output}";
  c.timeout = std::chrono::seconds(1);
  try {
    run_adapter(c, manifest_from("a\ta.png\n", dir.path()), {});
    FAIL() << "expected AdapterFailed";
  } catch (const AdapterFailed& e) {
    EXPECT_TRUE(e.timed_out());
    EXPECT_NE(e.diagnostics().find("still working"), std::string::npos);
  }
}

TEST(RunAdapter, CrashLeavesCacheUntouched) {
  TempDir dir;
  AdapterRunOptions options;
  options.cache_dir = dir / "cache";
  AdapterConfig c;
  c.name = "crash";
  c.command_template = "printf 'frame_id,x,y,w,h,score\\na,1,1,1,1,1\\n' > {output}; echo boom >&2; exit 7 # {manifest}";
  try {
    run_adapter(c, manifest_from("a\ta.png\n", dir.path()), options);
    FAIL() << "expected AdapterFailed";
  } catch (const AdapterFailed& e) {
    EXPECT_EQ(e.exit_code(), 7);
    EXPECT_FALSE(e.timed_out());
    EXPECT_EQ(e.diagnostics(), "boom\n");
  }
  EXPECT_EQ(count_files(dir / "cache" / "crash"), 0u);
}

TEST(RunAdapter, MalformedOutputNamesAdapter) {
  TempDir dir;
  AdapterRunOptions options;
  options.cache_dir = dir / "cache";
  AdapterConfig c;
  c.name = "sloppy";
  c.command_template = "printf 'frame_id,x,y,w,h,score\\na,1,1,0,1,1\\n' > {output} # {manifest}";
  try {
    run_adapter(c, manifest_from("a\ta.png\n", dir.path()), options);
    FAIL() << "expected AdapterOutputMalformed";
  } catch (const AdapterOutputMalformed& e) {
    EXPECT_EQ(e.adapter(), "sloppy");
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_EQ(count_files(dir / "cache" / "sloppy"), 0u);

  c.command_template = "true {manifest} {output}";
  EXPECT_THROW(run_adapter(c, manifest_from("a\ta.png\n", dir.path()), options), AdapterOutputMalformed);
}

TEST(RunAdapter, RejectsEmptyManifestAndBadConfig) {
  AdapterConfig c = replay_config("/dev/null");
  EXPECT_THROW(run_adapter(c, RunManifest{}, {}), ConfigError);
  c.command_template = "true";
  EXPECT_THROW(run_adapter(c, manifest_from("a\ta.png\n", "/"), {}), ConfigError);
}
