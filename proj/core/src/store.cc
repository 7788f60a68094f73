// Copyright 2026 The NLUForge Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nluforge/store.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nluforge/error.h"
#include "nluforge/hash.h"

namespace nluforge {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::string_view kIndexFile = "index.json";

std::string NowRfc3339() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Write-then-rename so readers never observe a partial file.
void WriteFileAtomic(const fs::path& path, std::string_view data) {
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "rename " + tmp.string() + ": " + ec.message());
}

std::vector<VersionInfo> ReadIndex(const fs::path& dir) {
  const fs::path index = dir / kIndexFile;
  std::error_code ec;
  if (!fs::exists(index, ec)) return {};
  try {
    const json doc = json::parse(ReadFile(index));
    std::vector<VersionInfo> out;
    for (const auto& v : doc.at("versions")) {
      out.push_back(VersionInfo{VersionId(v.at("id").get<std::string>()),
                                v.at("size").get<std::uint64_t>(),
                                v.at("created_at").get<std::string>()});
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, "corrupt index " + index.string() + ": " + e.what());
  }
}

void WriteIndex(const fs::path& dir, const std::vector<VersionInfo>& versions) {
  ordered_json doc;
  doc["versions"] = ordered_json::array();
  for (const auto& v : versions) {
    ordered_json entry;
    entry["id"] = v.id.str();
    entry["size"] = v.size;
    entry["created_at"] = v.created_at;
    doc["versions"].push_back(std::move(entry));
  }
  WriteFileAtomic(dir / kIndexFile, doc.dump(2) + "\n");
}

class FileLock {
 public:
  explicit FileLock(const fs::path& path)
      : fd_(::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644)) {
    if (fd_ < 0) throw Error(ErrorCode::kIo, "cannot open lock " + path.string());
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw Error(ErrorCode::kIo, "cannot lock " + path.string());
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_;
};

bool IsNameChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' ||
         c == '-';
}

}  // namespace

std::string_view NamespaceName(Namespace ns) {
  switch (ns) {
    case Namespace::kDatasets: return "datasets";
    case Namespace::kModels: return "models";
    case Namespace::kReports: return "reports";
  }
  return "datasets";
}

Namespace ParseNamespace(std::string_view name) {
  if (name == "datasets") return Namespace::kDatasets;
  if (name == "models") return Namespace::kModels;
  if (name == "reports") return Namespace::kReports;
  throw Error(ErrorCode::kInvalidArgument, "unknown namespace '" + std::string(name) + "'");
}

void ValidateObjectName(std::string_view name) {
  auto fail = [&] {
    throw Error(ErrorCode::kInvalidArgument,
                "invalid object name '" + std::string(name) + "'");
  };
  if (name.empty()) fail();
  std::size_t pos = 0;
  while (true) {
    const auto slash = name.find('/', pos);
    const std::string_view segment = name.substr(pos, slash - pos);
    if (segment.empty() || segment == "." || segment == "..") fail();
    for (char c : segment) {
      if (!IsNameChar(c)) fail();
    }
    if (slash == std::string_view::npos) break;
    pos = slash + 1;
  }
}

std::string ObjectKey::ToString() const {
  return std::string(NamespaceName(ns)) + "/" + name;
}

ObjectKey ObjectKey::Parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                "object key must be namespace/name: '" + std::string(text) + "'");
  }
  ObjectKey key{ParseNamespace(text.substr(0, slash)), std::string(text.substr(slash + 1))};
  ValidateObjectName(key.name);
  return key;
}

VersionId::VersionId(std::string value) : value_(std::move(value)) {
  // <counter, at least 8 digits>-<16 lowercase hex digits>
  const auto dash = value_.find('-');
  const bool ok = dash != std::string::npos && dash >= 8 &&
                  value_.find_first_not_of("0123456789") == dash &&
                  value_.size() - dash - 1 == 16 &&
                  value_.find_first_not_of("0123456789abcdef", dash + 1) == std::string::npos;
  if (!ok) throw Error(ErrorCode::kInvalidArgument, "malformed version id '" + value_ + "'");
}

std::int64_t VersionId::counter() const {
  const auto dash = value_.find('-');
  try {
    return std::stoll(value_.substr(0, dash));
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidArgument, "malformed version id '" + value_ + "'");
  }
}

VersionId ArtifactStore::Latest(const ObjectKey& key) {
  auto versions = ListVersions(key);
  if (versions.empty()) {
    throw Error(ErrorCode::kNotFound, "no object " + key.ToString());
  }
  return versions.back().id;
}

VersionId ArtifactStore::ByCounter(const ObjectKey& key, std::int64_t counter) {
  for (const auto& v : ListVersions(key)) {
    if (v.id.counter() == counter) return v.id;
  }
  throw Error(ErrorCode::kNotFound, "no version " + std::to_string(counter) +
                                        " of " + key.ToString());
}

FilesystemStore::FilesystemStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  const fs::path probe = root_ / (".probe." + std::to_string(::getpid()));
  {
    std::ofstream out(probe);
    if (ec || !out) {
      throw Error(ErrorCode::kIo, "store root " + root_.string() + " is not writable");
    }
  }
  fs::remove(probe, ec);
}

fs::path FilesystemStore::KeyDir(const ObjectKey& key) const {
  ValidateObjectName(key.name);
  return root_ / NamespaceName(key.ns) / key.name;
}

std::mutex& FilesystemStore::KeyMutex(const ObjectKey& key) {
  std::lock_guard lock(locks_mu_);
  auto& slot = key_locks_[key.ToString()];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

VersionId FilesystemStore::Put(const ObjectKey& key, std::string_view data) {
  const fs::path dir = KeyDir(key);
  std::lock_guard lock(KeyMutex(key));
  std::error_code ec;
  fs::create_directories(dir / "versions", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  FileLock file_lock(dir / ".lock");

  auto versions = ReadIndex(dir);
  const std::int64_t counter = versions.empty() ? 1 : versions.back().id.counter() + 1;
  char prefix[24];
  std::snprintf(prefix, sizeof(prefix), "%08lld-", static_cast<long long>(counter));
  VersionId id(prefix + Sha256Hex(data).substr(0, 16));
  WriteFileAtomic(dir / "versions" / id.str(), data);
  versions.push_back(VersionInfo{id, data.size(), NowRfc3339()});
  WriteIndex(dir, versions);
  return id;
}

std::string FilesystemStore::Get(const ObjectKey& key,
                                 const std::optional<VersionId>& version) {
  const fs::path dir = KeyDir(key);
  const auto versions = ReadIndex(dir);
  if (versions.empty()) throw Error(ErrorCode::kNotFound, "no object " + key.ToString());
  VersionId target = versions.back().id;
  if (version) {
    const bool known = std::any_of(versions.begin(), versions.end(),
                                   [&](const VersionInfo& v) { return v.id == *version; });
    if (!known) {
      throw Error(ErrorCode::kNotFound,
                  "no version " + version->str() + " of " + key.ToString());
    }
    target = *version;
  }
  return ReadFile(dir / "versions" / target.str());
}

std::vector<VersionInfo> FilesystemStore::ListVersions(const ObjectKey& key) {
  return ReadIndex(KeyDir(key));
}

std::vector<ObjectKey> FilesystemStore::ListKeys(Namespace ns) {
  std::vector<ObjectKey> keys;
  const fs::path base = root_ / NamespaceName(ns);
  std::error_code ec;
  if (!fs::exists(base, ec)) return keys;
  for (auto it = fs::recursive_directory_iterator(base, ec);
       it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) break;
    if (it->is_regular_file() && it->path().filename() == kIndexFile) {
      keys.push_back(ObjectKey{ns, fs::relative(it->path().parent_path(), base).generic_string()});
    }
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::string DownloadModel(ArtifactStore& store, const ObjectKey& key,
                          const std::optional<VersionId>& version) {
  if (key.ns != Namespace::kModels) {
    throw Error(ErrorCode::kInvalidArgument,
                key.ToString() + " is not in the models namespace");
  }
  return store.Get(key, version);
}

}  // namespace nluforge
