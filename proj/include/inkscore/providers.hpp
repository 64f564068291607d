#pragma once

#include <string>
#include <vector>

#include "inkscore/cache.hpp"
#include "inkscore/content.hpp"

namespace inkscore {

// One remote model endpoint. The API key is named by environment variable
// and resolved at request time; key material never lands in configs, caches,
// or reports.
struct ProviderConfig {
    std::string endpoint;     // e.g. http://127.0.0.1:8089/v1/embed
    std::string model_id;
    std::string api_key_env;  // name of the env var holding the bearer token
    int batch_size = 16;
    int max_retries = 3;      // retries after the first attempt
    double timeout_s = 30.0;
    int max_inflight = 4;     // concurrent requests
    int backoff_ms = 250;     // base of the exponential retry backoff
};

// The captioning instruction sent with every caption request. Reconstructed
// from the published constraints: content only, under 15 words, flag
// uninterpretable drawings.
extern const char* const kCaptionInstruction;

// Wire shape, shared by all three calls:
//   request  {"model": id, "input": [item, ...]}          (+ "instruction" for captions)
//   response {"data": [{"embedding": [..]} | {"caption": ".."}, ...]}
// Images travel base64-encoded; texts as-is.
//
// All calls are cache-first (content hash + model + kind); only misses are
// batched over the network, ceil(misses/batch_size) requests, at most
// max_inflight in parallel, each batch retried with exponential backoff.
// With `offline`, any cache miss raises ProviderError instead of a request.

std::vector<EmbeddingVector> embed_images(
    const std::vector<std::vector<unsigned char>>& images,
    const ProviderConfig& cfg, ProviderCache& cache, bool offline,
    std::vector<std::string>* warnings = nullptr);

std::vector<EmbeddingVector> embed_texts(
    const std::vector<std::string>& texts, const ProviderConfig& cfg,
    ProviderCache& cache, bool offline,
    std::vector<std::string>* warnings = nullptr);

// A refusal (empty caption in the response) yields a record with empty text
// and valid=false rather than an error; over-length captions are kept with a
// warning. hard_to_interpret is a case-insensitive substring test.
std::vector<CaptionRecord> caption_images(
    const std::vector<std::string>& ids,
    const std::vector<std::vector<unsigned char>>& images,
    const ProviderConfig& cfg, ProviderCache& cache, bool offline,
    std::vector<std::string>* warnings = nullptr);

std::string base64_encode(const unsigned char* data, std::size_t n);
std::string base64_encode(const std::vector<unsigned char>& bytes);

} // namespace inkscore
