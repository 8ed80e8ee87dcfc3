#include "heartcast/service.hpp"

#include <algorithm>
#include <numeric>

#include <httplib.h>
#include <json.hpp>

#include "heartcast/error.hpp"
#include "heartcast/scenario_io.hpp"

namespace heartcast {

namespace {

using ojson = nlohmann::ordered_json;

ApiResponse api_error(int status, std::string_view code, const std::string& message,
                      const std::string& field_path = {}, const RelaxationLog* log = nullptr) {
  ojson body;
  body["code"] = std::string(code);
  body["message"] = message;
  body["field_path"] = field_path.empty() ? ojson(nullptr) : ojson(field_path);
  if (log) body["relaxation_log"] = relaxation_log_json(*log);
  return {status, body.dump() + "\n"};
}

std::string prefixed(const std::string& prefix, const std::string& path) {
  if (path.empty() || path == "$") return prefix;
  if (path.front() == '[') return prefix + path;
  return prefix + "." + path;
}

Scenario scenario_from(const nlohmann::json& doc) {
  ParseOptions options;
  options.allow_sample_files = false;
  return parse_scenario(doc, options);
}

}  // namespace

ApiResponse handle_health() { return {200, "{\"status\":\"ok\"}\n"}; }

ApiResponse handle_forecast(std::string_view body, const EngineOptions& options) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    return api_error(400, "invalid_scenario", std::string("body is not valid JSON: ") + e.what());
  }
  try {
    const Scenario scenario = scenario_from(doc);
    return {200, render_report(run_forecast(scenario, options))};
  } catch (const InsufficientDataError& e) {
    return api_error(422, "insufficient_data", e.what(), {}, &e.relaxation_log());
  } catch (const ValidationError& e) {
    return api_error(400, "invalid_scenario", e.what(), e.field_path());
  } catch (const std::exception& e) {
    return api_error(500, "internal", e.what());
  }
}

ApiResponse handle_compare(std::string_view body, const EngineOptions& options) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    return api_error(400, "invalid_scenario", std::string("body is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("scenarios") || !doc.at("scenarios").is_array() ||
      doc.size() != 1) {
    return api_error(400, "invalid_scenario", "body must be {\"scenarios\": [...]}", "scenarios");
  }
  const auto& list = doc.at("scenarios");
  if (list.empty() || list.size() > kMaxCompareScenarios) {
    return api_error(400, "invalid_scenario",
                     "compare takes 1 to " + std::to_string(kMaxCompareScenarios) + " scenarios",
                     "scenarios");
  }

  std::vector<Scenario> scenarios;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string prefix = "scenarios[" + std::to_string(i) + "]";
    try {
      scenarios.push_back(scenario_from(list[i]));
    } catch (const ValidationError& e) {
      return api_error(400, "invalid_scenario", prefix + ": " + e.what(),
                       prefixed(prefix, e.field_path()));
    }
  }

  ojson reports = ojson::array();
  std::vector<double> best(scenarios.size());
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    try {
      const Report report = run_forecast(scenarios[i], options);
      best[i] = std::max_element(report.options.begin(), report.options.end(),
                                 [](const auto& a, const auto& b) { return a.value < b.value; })
                    ->value;
      reports.push_back(report_json(report));
    } catch (const InsufficientDataError& e) {
      return api_error(422, "insufficient_data",
                       "scenarios[" + std::to_string(i) + "]: " + e.what(),
                       "scenarios[" + std::to_string(i) + "]", &e.relaxation_log());
    } catch (const ValidationError& e) {
      return api_error(400, "invalid_scenario", e.what(),
                       prefixed("scenarios[" + std::to_string(i) + "]", e.field_path()));
    } catch (const std::exception& e) {
      return api_error(500, "internal", e.what());
    }
  }
  std::vector<std::size_t> ranking(scenarios.size());
  std::iota(ranking.begin(), ranking.end(), 0);
  std::stable_sort(ranking.begin(), ranking.end(),
                   [&](std::size_t a, std::size_t b) { return best[a] > best[b]; });

  ojson out;
  out["reports"] = std::move(reports);
  out["ranking"] = ranking;
  out["best_values"] = best;
  return {200, out.dump(2) + "\n"};
}

struct Service::Impl {
  httplib::Server server;
  EngineOptions options;
};

Service::Service(EngineOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->options = options;
  auto& server = impl_->server;
  server.set_payload_max_length(kMaxRequestBytes);
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});

  const auto reply = [](httplib::Response& res, const ApiResponse& api) {
    res.status = api.status;
    res.set_content(api.body, "application/json");
  };
  server.Get("/healthz", [reply](const httplib::Request&, httplib::Response& res) {
    reply(res, handle_health());
  });
  server.Post("/api/v1/forecast", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_forecast(req.body, impl_->options));
  });
  server.Post("/api/v1/compare", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_compare(req.body, impl_->options));
  });
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.status == 404) {
      res.set_content("{\"status\":\"not_found\"}\n", "application/json");
    } else if (res.status == 413) {
      res.set_content(api_error(413, "invalid_scenario", "request body exceeds 1 MiB").body,
                      "application/json");
    }
  });
}

Service::~Service() { stop(); }

bool Service::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int Service::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool Service::serve() { return impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_) impl_->server.stop();
}

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace heartcast
