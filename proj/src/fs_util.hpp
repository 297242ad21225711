#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace facebench::detail {

std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place.
/// Throws OutputUnwritableError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// mkdtemp-backed directory removed (recursively) on destruction.
class ScratchDir {
 public:
  ScratchDir(const std::filesystem::path& parent, std::string_view prefix);
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace facebench::detail
