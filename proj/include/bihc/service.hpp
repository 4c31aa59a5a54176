#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>

namespace bihc {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  ///< 0 picks a free port
  std::chrono::seconds idle_timeout{3600};
};

/// Session-based precompute and deformation over HTTP.
///
///   POST   /sessions               {"cage", "shape", "config"} -> 201 {"id", ...} | 422 report
///   GET    /sessions/{id}          state, done, total, error
///   GET    /sessions/{id}/table    cache bytes | 503 + Retry-After while precomputing
///   POST   /sessions/{id}/deform   {"target", "s_mode", "w"} -> little-endian f64 pairs
///   DELETE /sessions/{id}
///   GET    /health
class DeformService {
 public:
  explicit DeformService(ServiceOptions options = {});
  ~DeformService();
  DeformService(const DeformService&) = delete;
  DeformService& operator=(const DeformService&) = delete;

  /// Binds and serves on a background thread; returns the bound port.
  int start();
  /// Binds and serves on the calling thread until stop().
  void run();
  void stop();

  int port() const;
  std::size_t session_count() const;
  /// Drops ready or failed sessions idle for longer than the timeout.
  std::size_t expire_idle();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace bihc
