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

#ifndef NLUFORGE_STORE_H_
#define NLUFORGE_STORE_H_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nluforge {

enum class Namespace { kDatasets, kModels, kReports };

std::string_view NamespaceName(Namespace ns);
Namespace ParseNamespace(std::string_view name);

// Throws Error(kInvalidArgument) unless `name` is one or more
// [A-Za-z0-9._-]+ segments joined by '/', with no "." or ".." segment.
void ValidateObjectName(std::string_view name);

struct ObjectKey {
  Namespace ns = Namespace::kDatasets;
  std::string name;

  // "namespace/name".
  std::string ToString() const;
  static ObjectKey Parse(std::string_view text);

  auto operator<=>(const ObjectKey&) const = default;
};

// "<8-digit counter>-<16 hex digits of the content SHA-256>". Lexicographic
// order equals put order within a key.
class VersionId {
 public:
  VersionId() = default;
  // Throws Error(kInvalidArgument) unless value looks like 00000001-<16 hex>.
  explicit VersionId(std::string value);

  const std::string& str() const { return value_; }
  std::int64_t counter() const;

  auto operator<=>(const VersionId&) const = default;

 private:
  std::string value_;
};

struct VersionInfo {
  VersionId id;
  std::uint64_t size = 0;
  std::string created_at;  // RFC 3339, UTC
};

// Versioned object storage. Every put creates a new immutable version.
class ArtifactStore {
 public:
  virtual ~ArtifactStore() = default;

  virtual VersionId Put(const ObjectKey& key, std::string_view data) = 0;
  // Latest version when `version` is absent. Throws Error(kNotFound).
  virtual std::string Get(const ObjectKey& key,
                          const std::optional<VersionId>& version = std::nullopt) = 0;
  // Ascending; empty for an unknown key.
  virtual std::vector<VersionInfo> ListVersions(const ObjectKey& key) = 0;
  virtual std::vector<ObjectKey> ListKeys(Namespace ns) = 0;

  // Latest version id, or Error(kNotFound).
  VersionId Latest(const ObjectKey& key);
  // Resolves a version by its counter. Throws Error(kNotFound).
  VersionId ByCounter(const ObjectKey& key, std::int64_t counter);
};

// Layout: root/<namespace>/<name>/versions/<id> plus root/<namespace>/<name>/
// index.json ({"versions": [{"id", "size", "created_at"}]}). Puts to one key
// are serialized by an in-process mutex and an advisory file lock, so
// several processes may share one root.
class FilesystemStore : public ArtifactStore {
 public:
  // Creates the root if needed; throws Error(kIo) when it is not writable.
  explicit FilesystemStore(std::filesystem::path root);

  VersionId Put(const ObjectKey& key, std::string_view data) override;
  std::string Get(const ObjectKey& key,
                  const std::optional<VersionId>& version = std::nullopt) override;
  std::vector<VersionInfo> ListVersions(const ObjectKey& key) override;
  std::vector<ObjectKey> ListKeys(Namespace ns) override;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path KeyDir(const ObjectKey& key) const;
  std::mutex& KeyMutex(const ObjectKey& key);

  std::filesystem::path root_;
  std::mutex locks_mu_;
  std::map<std::string, std::unique_ptr<std::mutex>> key_locks_;
};

// The stored model archive bytes for `key` (models namespace only).
std::string DownloadModel(ArtifactStore& store, const ObjectKey& key,
                          const std::optional<VersionId>& version = std::nullopt);

}  // namespace nluforge

#endif  // NLUFORGE_STORE_H_
