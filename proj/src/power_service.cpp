#include "remeasure/power_service.hpp"

#include <cmath>

#include "remeasure/io.hpp"
#include "remeasure/power.hpp"

// After Eigen: pulls in system headers that define a `res` macro.
#include <httplib.h>

namespace remeasure {

namespace {

ServiceResponse reply(int status, const json& j) { return {status, j.dump()}; }

// Reads an optional numeric field, recording a message when it has the wrong type.
template <typename T>
std::optional<T> field(const json& body, const char* name, json& errors) {
  if (!body.contains(name) || body.at(name).is_null()) return std::nullopt;
  const auto& v = body.at(name);
  if constexpr (std::is_integral_v<T>) {
    if (v.is_number_integer() || v.is_number_unsigned()) return v.get<T>();
    if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>())
      return static_cast<T>(v.get<double>());
    errors[name] = "must be an integer";
  } else {
    if (v.is_number()) return v.get<T>();
    errors[name] = "must be a number";
  }
  return std::nullopt;
}

}  // namespace

ServiceResponse handle_power(const std::string& body_text) {
  json body;
  try {
    body = json::parse(body_text);
  } catch (const json::exception&) {
    return reply(400, {{"error", "invalid request"}, {"fields", {{"body", "must be a JSON object"}}}});
  }
  if (!body.is_object())
    return reply(400, {{"error", "invalid request"}, {"fields", {{"body", "must be a JSON object"}}}});

  json errors = json::object();
  const auto n1 = field<Index>(body, "n1", errors);
  const auto n2 = field<Index>(body, "n2", errors);
  const auto rho = field<double>(body, "rho", errors);
  const auto d = field<double>(body, "d", errors);
  const auto alpha = field<double>(body, "alpha", errors);
  const auto sigma1 = field<double>(body, "sigma1", errors);
  const auto a1 = field<double>(body, "a1", errors);
  const auto lo = field<Index>(body, "n1_prime_min", errors);
  const auto hi = field<Index>(body, "n1_prime_max", errors);
  const auto target = field<double>(body, "target", errors);

  for (const auto& [name, present] : {std::pair{"n1", n1.has_value()}, {"n2", n2.has_value()},
                                      {"rho", rho.has_value()}, {"d", d.has_value()},
                                      {"alpha", alpha.has_value()}})
    if (!present && !errors.contains(name)) errors[name] = "required";

  if (n1 && *n1 < 2) errors["n1"] = "must be >= 2";
  if (n2 && *n2 < 2) errors["n2"] = "must be >= 2";
  if (rho && !(std::abs(*rho) < 1.0)) errors["rho"] = "must satisfy |rho| < 1";
  if (alpha && !(*alpha > 0.0 && *alpha < 1.0)) errors["alpha"] = "must lie in (0, 1)";
  if (sigma1 && !(*sigma1 > 0.0)) errors["sigma1"] = "must be > 0";
  if (target && !(*target > 0.0 && *target < 1.0)) errors["target"] = "must lie in (0, 1)";

  std::optional<PowerMode> mode;
  if (body.contains("mode")) {
    try {
      mode = parse_power_mode(body.at("mode").get<std::string>());
    } catch (const std::exception&) {
      errors["mode"] = "must be 'absolute' or 'relative'";
    }
  }
  if (mode && !target) errors["target"] = "required when mode is given";

  const Index max_n = n1.value_or(2);
  const Index range_lo = lo.value_or(2), range_hi = hi.value_or(max_n);
  if (n1 && *n1 >= 2) {
    if (range_lo < 2 || range_lo > max_n) errors["n1_prime_min"] = "must lie in [2, n1]";
    if (range_hi < range_lo || range_hi > max_n) errors["n1_prime_max"] = "must lie in [n1_prime_min, n1]";
  }
  if (!errors.empty()) return reply(400, {{"error", "invalid request"}, {"fields", errors}});

  PowerQuery q;
  q.n1 = *n1;
  q.n2 = *n2;
  q.n1_prime = *n1;
  q.rho = *rho;
  q.effect = *d;
  q.alpha = *alpha;
  q.sigma1 = sigma1.value_or(1.0);
  q.a1 = a1.value_or(0.0);
  try {
    q.check();
    const auto curve = power_curve(q, range_lo, range_hi);
    json out;
    out["query"] = {{"n1", q.n1}, {"n2", q.n2}, {"rho", q.rho}, {"d", q.effect}, {"alpha", q.alpha},
                    {"sigma1", q.sigma1}, {"a1", q.a1}, {"n1_prime_min", range_lo}, {"n1_prime_max", range_hi}};
    out["optimal_power"] = curve.empty() ? 0.0 : curve.front().power.optimal_power;
    json pts = json::array();
    for (const auto& pt : curve)
      pts.push_back({{"n1_prime", pt.n1_prime},
                     {"absolute_power", pt.power.absolute_power},
                     {"relative_power", pt.power.relative_power},
                     {"oracle_sd", pt.power.oracle_sd}});
    out["curve"] = pts;
    if (target) {
      const PowerMode m = mode.value_or(PowerMode::kAbsolute);
      const auto n = min_remeasured(q, *target, m);
      if (!n) {
        const double best = power_at(q.effect, oracle_sd_a0(q), q.alpha);
        return reply(422, {{"error", "target unachievable"},
                           {"target", *target},
                           {"mode", to_string(m)},
                           {"max_power", best}});
      }
      out["min_remeasured"] = {{"target", *target}, {"mode", to_string(m)}, {"n1_prime", *n}};
    }
    return reply(200, out);
  } catch (const InputError& e) {
    return reply(400, {{"error", "invalid request"}, {"fields", {{"query", e.what()}}}});
  }
}

ServiceResponse handle_health() { return reply(200, {{"status", "ok"}}); }

struct PowerService::Impl {
  ServiceOptions options;
  httplib::Server server;
};

PowerService::PowerService(ServiceOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  auto& srv = impl_->server;
  const std::string origin = impl_->options.cors_origin;
  auto cors = [origin](httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  };
  srv.Post("/api/power", [cors](const httplib::Request& req, httplib::Response& res) {
    const auto r = handle_power(req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
    cors(res);
  });
  srv.Options("/api/power", [cors](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    cors(res);
  });
  srv.Get("/healthz", [cors](const httplib::Request&, httplib::Response& res) {
    const auto r = handle_health();
    res.status = r.status;
    res.set_content(r.body, "application/json");
    cors(res);
  });
}

PowerService::~PowerService() = default;

bool PowerService::listen() { return impl_->server.listen(impl_->options.host, impl_->options.port); }

int PowerService::bind_to_any_port() { return impl_->server.bind_to_any_port(impl_->options.host); }

bool PowerService::listen_after_bind() { return impl_->server.listen_after_bind(); }

void PowerService::stop() { impl_->server.stop(); }

void PowerService::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace remeasure
