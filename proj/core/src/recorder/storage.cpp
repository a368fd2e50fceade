#include "teleop/recorder/storage.hpp"

#include <fstream>

#include <fmt/format.h>

namespace teleop {

namespace fs = std::filesystem;

void FilesystemStorage::write_file(const fs::path& path, std::span<const uint8_t> data) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw StorageError(fmt::format("cannot create {}: {}", path.parent_path().string(), ec.message()));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StorageError(fmt::format("cannot open {} for writing", path.string()));
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  out.close();
  if (!out) throw StorageError(fmt::format("write to {} failed", path.string()));
}

void FilesystemStorage::rename(const fs::path& from, const fs::path& to) {
  std::error_code ec;
  if (to.has_parent_path()) fs::create_directories(to.parent_path(), ec);
  if (!ec) fs::rename(from, to, ec);
  if (ec) throw StorageError(fmt::format("rename {} -> {}: {}", from.string(), to.string(), ec.message()));
}

void FilesystemStorage::remove_all(const fs::path& path) {
  std::error_code ec;
  fs::remove_all(path, ec);
  if (ec) throw StorageError(fmt::format("remove {}: {}", path.string(), ec.message()));
}

bool FilesystemStorage::exists(const fs::path& path) const {
  std::error_code ec;
  return fs::exists(path, ec);
}

std::optional<Bytes> FilesystemStorage::read_file(const fs::path& path) const {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void RecordingStorage::log(StorageOp op, const fs::path& path) {
  std::lock_guard lock(mu_);
  calls_.push_back({clock_.now(), op, path});
}

void RecordingStorage::write_file(const fs::path& path, std::span<const uint8_t> data) {
  log(StorageOp::write, path);
  inner_.write_file(path, data);
}

void RecordingStorage::rename(const fs::path& from, const fs::path& to) {
  log(StorageOp::rename, to);
  inner_.rename(from, to);
}

void RecordingStorage::remove_all(const fs::path& path) {
  log(StorageOp::remove, path);
  inner_.remove_all(path);
}

std::vector<StorageCall> RecordingStorage::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

void FaultyStorage::check(StorageOp op, const fs::path& path) {
  if (fail_when_ && fail_when_(op, path)) {
    ++faults_;
    throw StorageError(fmt::format("injected fault on {}", path.string()));
  }
}

void FaultyStorage::write_file(const fs::path& path, std::span<const uint8_t> data) {
  check(StorageOp::write, path);
  inner_.write_file(path, data);
}

void FaultyStorage::rename(const fs::path& from, const fs::path& to) {
  check(StorageOp::rename, to);
  inner_.rename(from, to);
}

void FaultyStorage::remove_all(const fs::path& path) {
  check(StorageOp::remove, path);
  inner_.remove_all(path);
}

}  // namespace teleop
