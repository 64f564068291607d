#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "inkscore/errors.hpp"

namespace inkscore {

std::string sha256_hex(const unsigned char* data, std::size_t n);
std::string sha256_hex(const std::string& text);
std::string sha256_hex(const std::vector<unsigned char>& bytes);

// Content-addressed store for provider responses. One JSON file per entry at
// <dir>/<kind>/<first two hash chars>/<hash>-<model>.json; entries are
// immutable once written, so a warmed cache replays a run byte for byte.
class ProviderCache {
public:
    explicit ProviderCache(std::filesystem::path dir);

    std::optional<nlohmann::json> get(const std::string& kind,
                                      const std::string& content_hash,
                                      const std::string& model_id) const;

    // No-op if the entry already exists.
    void put(const std::string& kind, const std::string& content_hash,
             const std::string& model_id, const nlohmann::json& payload);

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path entry_path(const std::string& kind,
                                     const std::string& content_hash,
                                     const std::string& model_id) const;

    std::filesystem::path dir_;
    mutable std::mutex write_mutex_;
};

} // namespace inkscore
