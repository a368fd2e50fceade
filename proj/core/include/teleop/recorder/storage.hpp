#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "teleop/clock.hpp"

namespace teleop {

using Bytes = std::vector<uint8_t>;

class StorageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every byte the recorder puts on disk goes through this, so tests can
/// observe or break it.
class Storage {
 public:
  virtual ~Storage() = default;
  /// Creates parent directories as needed; replaces an existing file.
  virtual void write_file(const std::filesystem::path& path, std::span<const uint8_t> data) = 0;
  /// Same-filesystem rename; creates the target's parent; replaces a file.
  virtual void rename(const std::filesystem::path& from, const std::filesystem::path& to) = 0;
  virtual void remove_all(const std::filesystem::path& path) = 0;
  virtual bool exists(const std::filesystem::path& path) const = 0;
  virtual std::optional<Bytes> read_file(const std::filesystem::path& path) const = 0;
};

class FilesystemStorage final : public Storage {
 public:
  void write_file(const std::filesystem::path& path, std::span<const uint8_t> data) override;
  void rename(const std::filesystem::path& from, const std::filesystem::path& to) override;
  void remove_all(const std::filesystem::path& path) override;
  bool exists(const std::filesystem::path& path) const override;
  std::optional<Bytes> read_file(const std::filesystem::path& path) const override;
};

enum class StorageOp { write, rename, remove };

struct StorageCall {
  Nanos time{0};
  StorageOp op = StorageOp::write;
  std::filesystem::path path;
};

/// Pass-through that logs each mutating call with the clock time.
class RecordingStorage final : public Storage {
 public:
  RecordingStorage(Storage& inner, const Clock& clock) : inner_(inner), clock_(clock) {}

  void write_file(const std::filesystem::path& path, std::span<const uint8_t> data) override;
  void rename(const std::filesystem::path& from, const std::filesystem::path& to) override;
  void remove_all(const std::filesystem::path& path) override;
  bool exists(const std::filesystem::path& path) const override { return inner_.exists(path); }
  std::optional<Bytes> read_file(const std::filesystem::path& path) const override {
    return inner_.read_file(path);
  }

  std::vector<StorageCall> calls() const;

 private:
  void log(StorageOp op, const std::filesystem::path& path);

  Storage& inner_;
  const Clock& clock_;
  mutable std::mutex mu_;
  std::vector<StorageCall> calls_;
};

/// Pass-through that throws StorageError for calls the predicate selects.
class FaultyStorage final : public Storage {
 public:
  using Predicate = std::function<bool(StorageOp, const std::filesystem::path&)>;
  FaultyStorage(Storage& inner, Predicate fail_when) : inner_(inner), fail_when_(std::move(fail_when)) {}

  void write_file(const std::filesystem::path& path, std::span<const uint8_t> data) override;
  void rename(const std::filesystem::path& from, const std::filesystem::path& to) override;
  void remove_all(const std::filesystem::path& path) override;
  bool exists(const std::filesystem::path& path) const override { return inner_.exists(path); }
  std::optional<Bytes> read_file(const std::filesystem::path& path) const override {
    return inner_.read_file(path);
  }

  uint64_t faults() const { return faults_; }

 private:
  void check(StorageOp op, const std::filesystem::path& path);

  Storage& inner_;
  Predicate fail_when_;
  uint64_t faults_ = 0;
};

}  // namespace teleop
