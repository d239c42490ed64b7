#include <chrono>
#include <future>
#include <thread>

#include <spdlog/spdlog.h>

#include "httplib.h"
#include "json.hpp"
#include "prospect/embed.hpp"
#include "prospect/error.hpp"

namespace prospect {

using json = nlohmann::json;

ServiceEmbedder::ServiceEmbedder(std::string url, std::size_t batch_size,
                                 std::size_t max_in_flight, Retry retry)
    : batch_size_(batch_size), max_in_flight_(max_in_flight), retry_(retry) {
  if (batch_size_ == 0 || max_in_flight_ == 0 || retry_.attempts < 1) {
    throw ContractError("service embedder: batch size, in-flight limit and attempts must be positive");
  }
  // Split "http://host:port/prefix" into the client origin and a path prefix.
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) {
    scheme_host_port_ = url;
  } else {
    scheme_host_port_ = url.substr(0, path_start);
    base_path_ = url.substr(path_start);
    while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  }
  if (scheme_host_port_.empty()) throw ContractError("service embedder: empty URL");
}

std::vector<std::vector<float>> ServiceEmbedder::post_batch(std::span<const std::string> batch,
                                                            std::size_t& dim) const {
  const std::string body = json{{"texts", std::vector<std::string>(batch.begin(), batch.end())}}.dump();
  std::string last_error;
  auto backoff = std::chrono::milliseconds(retry_.initial_backoff_ms);
  for (int attempt = 1; attempt <= retry_.attempts; ++attempt) {
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(5);
    client.set_read_timeout(120);
    auto res = client.Post(base_path_ + "/embed", body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
    } else if (res->status != 200) {
      last_error = "HTTP status " + std::to_string(res->status);
    } else {
      json reply;
      try {
        reply = json::parse(res->body);
      } catch (const json::parse_error& e) {
        throw ProtocolError(std::string("embedding service returned invalid JSON: ") + e.what());
      }
      if (!reply.is_object() || !reply.contains("dim") || !reply["dim"].is_number_integer() ||
          !reply.contains("embeddings") || !reply["embeddings"].is_array()) {
        throw ProtocolError("embedding service reply lacks 'dim' or 'embeddings'");
      }
      dim = reply["dim"].get<std::size_t>();
      const auto& rows = reply["embeddings"];
      if (rows.size() != batch.size()) {
        throw ProtocolError("embedding service returned " + std::to_string(rows.size()) +
                            " vectors for " + std::to_string(batch.size()) + " texts");
      }
      std::vector<std::vector<float>> out;
      out.reserve(rows.size());
      for (const auto& r : rows) {
        if (!r.is_array() || r.size() != dim) {
          throw ProtocolError("embedding service returned a vector whose length != dim " +
                              std::to_string(dim));
        }
        std::vector<float> v;
        v.reserve(dim);
        for (const auto& x : r) {
          if (!x.is_number()) throw ProtocolError("embedding service returned a non-number");
          v.push_back(x.get<float>());
        }
        out.push_back(std::move(v));
      }
      return out;
    }
    spdlog::warn("embedding service attempt {}/{} failed: {}", attempt, retry_.attempts, last_error);
    if (attempt < retry_.attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw TransportError("embedding service at " + scheme_host_port_ + base_path_ + " failed after " +
                       std::to_string(retry_.attempts) + " attempts: " + last_error);
}

EmbeddingMatrix ServiceEmbedder::embed(std::span<const std::string> texts) const {
  const std::size_t n_batches = (texts.size() + batch_size_ - 1) / batch_size_;
  std::vector<std::vector<std::vector<float>>> results(n_batches);
  std::vector<std::size_t> dims(n_batches, 0);

  // Batches run in waves of at most max_in_flight concurrent requests.
  for (std::size_t wave = 0; wave < n_batches; wave += max_in_flight_) {
    const std::size_t wave_end = std::min(n_batches, wave + max_in_flight_);
    std::vector<std::future<void>> inflight;
    for (std::size_t b = wave; b < wave_end; ++b) {
      const auto first = b * batch_size_;
      const auto count = std::min(batch_size_, texts.size() - first);
      inflight.push_back(std::async(std::launch::async, [this, &results, &dims, texts, b, first, count] {
        results[b] = post_batch(texts.subspan(first, count), dims[b]);
      }));
    }
    for (auto& f : inflight) f.get();
  }

  const std::size_t dim = n_batches ? dims.front() : 2;
  std::vector<float> data;
  data.reserve(texts.size() * dim);
  for (std::size_t b = 0; b < n_batches; ++b) {
    if (dims[b] != dim) {
      throw ProtocolError("embedding dimension changed across batches (" + std::to_string(dim) +
                          " vs " + std::to_string(dims[b]) + ")");
    }
    for (const auto& row : results[b]) data.insert(data.end(), row.begin(), row.end());
  }
  return EmbeddingMatrix(texts.size(), dim, std::move(data));
}

}  // namespace prospect
