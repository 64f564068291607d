#include "inkscore/cache.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

namespace inkscore {

std::string sha256_hex(const unsigned char* data, std::size_t n) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(data, n, md, &len, EVP_sha256(), nullptr))
        throw Error("sha256 failed");
    static const char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

std::string sha256_hex(const std::string& text) {
    return sha256_hex(reinterpret_cast<const unsigned char*>(text.data()),
                      text.size());
}

std::string sha256_hex(const std::vector<unsigned char>& bytes) {
    return sha256_hex(bytes.data(), bytes.size());
}

namespace {

std::string sanitize(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '_';
        out += ok ? c : '_';
    }
    return out;
}

} // namespace

ProviderCache::ProviderCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path ProviderCache::entry_path(const std::string& kind,
                                                const std::string& content_hash,
                                                const std::string& model_id) const {
    if (content_hash.size() < 2) throw Error("cache: bad content hash");
    return dir_ / kind / content_hash.substr(0, 2) /
           (content_hash + "-" + sanitize(model_id) + ".json");
}

std::optional<nlohmann::json> ProviderCache::get(const std::string& kind,
                                                 const std::string& content_hash,
                                                 const std::string& model_id) const {
    const auto path = entry_path(kind, content_hash, model_id);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    nlohmann::json entry = nlohmann::json::parse(ss.str(), nullptr, false);
    if (entry.is_discarded() || !entry.contains("payload"))
        throw Error("cache: corrupt entry " + path.string());
    if (entry.value("content_hash", "") != content_hash ||
        entry.value("model_id", "") != model_id)
        throw Error("cache: entry key mismatch at " + path.string());
    return entry["payload"];
}

void ProviderCache::put(const std::string& kind, const std::string& content_hash,
                        const std::string& model_id,
                        const nlohmann::json& payload) {
    const auto path = entry_path(kind, content_hash, model_id);
    std::lock_guard<std::mutex> lock(write_mutex_);
    if (std::filesystem::exists(path)) return;  // immutable
    std::filesystem::create_directories(path.parent_path());

    nlohmann::json entry;
    entry["content_hash"] = content_hash;
    entry["model_id"] = model_id;
    entry["kind"] = kind;
    entry["payload"] = payload;

    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cache: cannot write " + tmp);
        const std::string body = entry.dump();
        out.write(body.data(), static_cast<std::streamsize>(body.size()));
        if (!out) throw Error("cache: write failed " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

} // namespace inkscore
