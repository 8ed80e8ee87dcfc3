#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "heartcast/forecast.hpp"

namespace heartcast {

inline constexpr std::size_t kMaxRequestBytes = 1 << 20;
inline constexpr std::size_t kMaxCompareScenarios = 8;

struct ApiResponse {
  int status = 200;
  std::string body;
};

/// POST /api/v1/forecast. The 200 body is byte-identical to the CLI report.
ApiResponse handle_forecast(std::string_view body, const EngineOptions& options = {});

/// POST /api/v1/compare with {"scenarios": [...]} (1 to 8 entries).
ApiResponse handle_compare(std::string_view body, const EngineOptions& options = {});

/// GET /healthz.
ApiResponse handle_health();

/// HTTP front end over the handlers above. Stateless; each request runs its
/// own engine.
class Service {
 public:
  explicit Service(EngineOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds and serves until stop(). Returns false when binding fails.
  bool listen(const std::string& host, int port);
  /// Binds to a free port and returns it, or -1. Call serve() afterwards.
  int bind_any_port(const std::string& host);
  bool serve();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace heartcast
