#pragma once

#include <memory>
#include <string>

namespace remeasure {

struct ServiceResponse {
  int status = 200;
  std::string body;  // JSON
};

/// POST /api/power. Pure function of the request body.
///
/// Request fields (snake_case): n1, n2, rho, d, alpha, and optionally sigma1,
/// a1, n1_prime_min, n1_prime_max, target, mode ("absolute" | "relative").
/// 400 on invariant violations with per-field messages, 422 when an absolute
/// target cannot be reached even at n1' = n1.
ServiceResponse handle_power(const std::string& body);

/// GET /healthz.
ServiceResponse handle_health();

struct ServiceOptions {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::string cors_origin = "*";
};

/// HTTP front end for handle_power / handle_health.
class PowerService {
 public:
  explicit PowerService(ServiceOptions options);
  ~PowerService();
  PowerService(const PowerService&) = delete;
  PowerService& operator=(const PowerService&) = delete;

  /// Blocks until stop(). Returns false when the port cannot be bound.
  bool listen();
  /// Binds an ephemeral port and returns it (or -1); serve with listen_after_bind().
  int bind_to_any_port();
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace remeasure
