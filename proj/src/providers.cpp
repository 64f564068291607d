#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "inkscore/providers.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <thread>

namespace inkscore {

const char* const kCaptionInstruction =
    "Write a short caption (under 15 words) describing only the content of "
    "the drawing, not its style. If the drawing cannot be interpreted, say "
    "that it is hard to interpret.";

std::string base64_encode(const unsigned char* data, std::size_t n) {
    static const char alphabet[] =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((n + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= n; i += 3) {
        const unsigned v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += alphabet[v & 63];
    }
    if (i + 1 == n) {
        const unsigned v = data[i] << 16;
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == n) {
        const unsigned v = (data[i] << 16) | (data[i + 1] << 8);
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::string base64_encode(const std::vector<unsigned char>& bytes) {
    return base64_encode(bytes.data(), bytes.size());
}

namespace {

struct Endpoint {
    std::string base;  // scheme://host[:port]
    std::string path;  // leading slash
};

Endpoint split_endpoint(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw Error("provider: endpoint must include a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

httplib::Headers auth_headers(const ProviderConfig& cfg) {
    httplib::Headers headers;
    if (!cfg.api_key_env.empty()) {
        if (const char* key = std::getenv(cfg.api_key_env.c_str()); key && *key)
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    return headers;
}

// One network round trip carrying a slice of the cache misses.
struct Batch {
    std::vector<std::size_t> unique_indices;  // into the unique-miss list
    nlohmann::json inputs = nlohmann::json::array();
};

// POSTs every batch, at most cfg.max_inflight at a time, retrying each with
// exponential backoff. `on_item(unique_index, data_element)` consumes the
// response entries. Throws ProviderError naming the first failed batch.
void run_batches(const std::vector<Batch>& batches, const ProviderConfig& cfg,
                 const nlohmann::json& request_extra,
                 const std::function<void(std::size_t, const nlohmann::json&)>& on_item) {
    if (batches.empty()) return;
    const Endpoint ep = split_endpoint(cfg.endpoint);
    const httplib::Headers headers = auth_headers(cfg);

    std::atomic<std::size_t> next{0};
    std::vector<std::string> batch_errors(batches.size());
    std::vector<nlohmann::json> batch_data(batches.size());

    auto worker = [&] {
        httplib::Client client(ep.base);
        client.set_connection_timeout(std::chrono::duration<double>(cfg.timeout_s));
        client.set_read_timeout(std::chrono::duration<double>(cfg.timeout_s));
        client.set_write_timeout(std::chrono::duration<double>(cfg.timeout_s));

        for (std::size_t b = next.fetch_add(1); b < batches.size();
             b = next.fetch_add(1)) {
            nlohmann::json request = request_extra;
            request["model"] = cfg.model_id;
            request["input"] = batches[b].inputs;
            const std::string body = request.dump();

            std::string last_error;
            bool done = false;
            for (int attempt = 0; attempt <= cfg.max_retries && !done; ++attempt) {
                if (attempt > 0) {
                    const auto delay = std::chrono::milliseconds(
                        cfg.backoff_ms << (attempt - 1));
                    std::this_thread::sleep_for(delay);
                }
                auto res = client.Post(ep.path, headers, body, "application/json");
                if (!res) {
                    last_error = httplib::to_string(res.error());
                    continue;
                }
                if (res->status != 200) {
                    last_error = "HTTP " + std::to_string(res->status);
                    continue;
                }
                nlohmann::json parsed =
                    nlohmann::json::parse(res->body, nullptr, false);
                if (parsed.is_discarded() || !parsed.contains("data") ||
                    !parsed["data"].is_array()) {
                    last_error = "malformed response body";
                    break;  // a well-formed reply gone wrong won't improve on retry
                }
                if (parsed["data"].size() != batches[b].inputs.size()) {
                    last_error = "response has " +
                                 std::to_string(parsed["data"].size()) +
                                 " items for " +
                                 std::to_string(batches[b].inputs.size()) + " inputs";
                    break;
                }
                batch_data[b] = std::move(parsed["data"]);
                done = true;
            }
            if (!done) batch_errors[b] = last_error;
        }
    };

    const std::size_t n_threads =
        std::min<std::size_t>(std::max(1, cfg.max_inflight), batches.size());
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();

    for (std::size_t b = 0; b < batches.size(); ++b)
        if (!batch_errors[b].empty())
            throw ProviderError("provider: batch " + std::to_string(b + 1) + "/" +
                                std::to_string(batches.size()) + " to " +
                                cfg.endpoint + " failed after " +
                                std::to_string(cfg.max_retries + 1) +
                                " attempts: " + batch_errors[b]);

    for (std::size_t b = 0; b < batches.size(); ++b)
        for (std::size_t i = 0; i < batches[b].unique_indices.size(); ++i)
            on_item(batches[b].unique_indices[i], batch_data[b][i]);
}

// Shared plan for all three operations: hash every item, satisfy what the
// cache holds, batch the unique misses.
struct CachePlan {
    std::vector<std::string> hashes;              // per input item
    std::vector<std::string> unique_hashes;       // first-seen order
    std::vector<std::size_t> unique_first_item;   // an item index per unique hash
    std::vector<std::size_t> miss_unique;         // unique indices not cached
};

CachePlan plan_cache(const std::vector<std::string>& hashes,
                     const std::string& kind, const ProviderConfig& cfg,
                     ProviderCache& cache, bool offline,
                     std::map<std::string, nlohmann::json>& found) {
    CachePlan plan;
    plan.hashes = hashes;
    std::map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < hashes.size(); ++i) {
        if (seen.emplace(hashes[i], plan.unique_hashes.size()).second) {
            plan.unique_hashes.push_back(hashes[i]);
            plan.unique_first_item.push_back(i);
        }
    }
    for (std::size_t u = 0; u < plan.unique_hashes.size(); ++u) {
        if (auto hit = cache.get(kind, plan.unique_hashes[u], cfg.model_id)) {
            found[plan.unique_hashes[u]] = std::move(*hit);
        } else if (offline) {
            throw ProviderError("provider: offline mode, cache miss for " + kind +
                                " item " + std::to_string(plan.unique_first_item[u]) +
                                " (hash " + plan.unique_hashes[u].substr(0, 12) +
                                "..., model " + cfg.model_id + ")");
        } else {
            plan.miss_unique.push_back(u);
        }
    }
    return plan;
}

std::vector<Batch> make_batches(const CachePlan& plan,
                                const std::function<nlohmann::json(std::size_t)>& input_of,
                                int batch_size) {
    std::vector<Batch> batches;
    Batch current;
    for (std::size_t u : plan.miss_unique) {
        current.unique_indices.push_back(u);
        current.inputs.push_back(input_of(plan.unique_first_item[u]));
        if (static_cast<int>(current.unique_indices.size()) >= batch_size) {
            batches.push_back(std::move(current));
            current = Batch{};
        }
    }
    if (!current.unique_indices.empty()) batches.push_back(std::move(current));
    return batches;
}

std::vector<EmbeddingVector> embed_common(
    const std::vector<std::string>& hashes,
    const std::function<nlohmann::json(std::size_t)>& input_of,
    const std::string& kind, EmbeddingSource source, const ProviderConfig& cfg,
    ProviderCache& cache, bool offline) {
    if (cfg.batch_size < 1) throw Error("provider: batch_size must be >= 1");

    std::map<std::string, nlohmann::json> found;
    CachePlan plan = plan_cache(hashes, kind, cfg, cache, offline, found);
    const auto batches = make_batches(plan, input_of, cfg.batch_size);

    run_batches(batches, cfg, nlohmann::json::object(),
                [&](std::size_t u, const nlohmann::json& item) {
                    if (!item.contains("embedding") || !item["embedding"].is_array())
                        throw ProviderError("provider: response item lacks an embedding");
                    found[plan.unique_hashes[u]] = item["embedding"];
                    cache.put(kind, plan.unique_hashes[u], cfg.model_id,
                              item["embedding"]);
                });

    std::vector<EmbeddingVector> out(hashes.size());
    std::size_t dim = 0;
    for (std::size_t i = 0; i < hashes.size(); ++i) {
        const nlohmann::json& payload = found.at(hashes[i]);
        EmbeddingVector v;
        v.source = source;
        v.model_id = cfg.model_id;
        v.values.reserve(payload.size());
        for (const auto& x : payload) {
            if (!x.is_number())
                throw ProviderError("provider: non-numeric embedding component");
            const double d = x.get<double>();
            if (!std::isfinite(d))
                throw ProviderError("provider: non-finite embedding component");
            v.values.push_back(d);
        }
        if (v.values.empty())
            throw ProviderError("provider: empty embedding for item " +
                                std::to_string(i));
        if (dim == 0) dim = v.values.size();
        else if (v.values.size() != dim)
            throw ProviderError("provider: embedding dimension mismatch at item " +
                                std::to_string(i) + " (" +
                                std::to_string(v.values.size()) + " vs " +
                                std::to_string(dim) + ")");
        out[i] = std::move(v);
    }
    return out;
}

} // namespace

std::vector<EmbeddingVector> embed_images(
    const std::vector<std::vector<unsigned char>>& images,
    const ProviderConfig& cfg, ProviderCache& cache, bool offline,
    std::vector<std::string>* /*warnings*/) {
    std::vector<std::string> hashes;
    hashes.reserve(images.size());
    for (const auto& img : images) hashes.push_back(sha256_hex(img));
    return embed_common(
        hashes,
        [&](std::size_t i) { return nlohmann::json(base64_encode(images[i])); },
        "image_embedding", EmbeddingSource::image, cfg, cache, offline);
}

std::vector<EmbeddingVector> embed_texts(const std::vector<std::string>& texts,
                                         const ProviderConfig& cfg,
                                         ProviderCache& cache, bool offline,
                                         std::vector<std::string>* /*warnings*/) {
    std::vector<std::string> hashes;
    hashes.reserve(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (texts[i].empty())
            throw ValidationError("empty caption at item " + std::to_string(i));
        hashes.push_back(sha256_hex(texts[i]));
    }
    return embed_common(
        hashes, [&](std::size_t i) { return nlohmann::json(texts[i]); },
        "text_embedding", EmbeddingSource::text, cfg, cache, offline);
}

std::vector<CaptionRecord> caption_images(
    const std::vector<std::string>& ids,
    const std::vector<std::vector<unsigned char>>& images,
    const ProviderConfig& cfg, ProviderCache& cache, bool offline,
    std::vector<std::string>* warnings) {
    if (ids.size() != images.size())
        throw Error("caption_images: ids and images differ in length");
    if (cfg.batch_size < 1) throw Error("provider: batch_size must be >= 1");

    std::vector<std::string> hashes;
    hashes.reserve(images.size());
    for (const auto& img : images) hashes.push_back(sha256_hex(img));

    std::map<std::string, nlohmann::json> found;
    CachePlan plan = plan_cache(hashes, "caption", cfg, cache, offline, found);
    const auto batches = make_batches(
        plan, [&](std::size_t i) { return nlohmann::json(base64_encode(images[i])); },
        cfg.batch_size);

    nlohmann::json extra;
    extra["instruction"] = kCaptionInstruction;
    run_batches(batches, cfg, extra,
                [&](std::size_t u, const nlohmann::json& item) {
                    if (!item.contains("caption") || !item["caption"].is_string())
                        throw ProviderError("provider: response item lacks a caption");
                    found[plan.unique_hashes[u]] = item["caption"];
                    cache.put("caption", plan.unique_hashes[u], cfg.model_id,
                              item["caption"]);
                });

    auto word_count = [](const std::string& s) {
        int words = 0;
        bool in_word = false;
        for (char c : s) {
            const bool space = std::isspace(static_cast<unsigned char>(c));
            if (!space && !in_word) ++words;
            in_word = !space;
        }
        return words;
    };

    std::vector<CaptionRecord> out(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        CaptionRecord rec;
        rec.drawing_id = ids[i];
        rec.text = found.at(hashes[i]).get<std::string>();
        rec.valid = !rec.text.empty();
        rec.hard_to_interpret = mentions_hard_to_interpret(rec.text);
        if (rec.valid) {
            const int words = word_count(rec.text);
            if (words >= 15 && warnings)
                warnings->push_back("caption for '" + ids[i] + "' has " +
                                    std::to_string(words) +
                                    " words (expected under 15); kept");
        } else if (warnings) {
            warnings->push_back("caption for '" + ids[i] +
                                "' was refused by the provider");
        }
        out[i] = std::move(rec);
    }
    return out;
}

} // namespace inkscore
