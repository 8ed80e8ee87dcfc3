#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "heartcast/service.hpp"

namespace {
heartcast::Service* g_service = nullptr;
void on_signal(int) {
  if (g_service) g_service->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HTTP forecast service", "heartcast-server"};
  std::string bind = "127.0.0.1";
  int port = 8080;
  app.add_option("--bind", bind, "Address to listen on");
  app.add_option("--port", port, "Port to listen on")->check(CLI::Range(1, 65535));
  CLI11_PARSE(app, argc, argv);

  heartcast::Service service;
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "listening on " << bind << ":" << port << "\n";
  if (!service.listen(bind, port)) {
    std::cerr << "error: cannot listen on " << bind << ":" << port << "\n";
    return 2;
  }
  return 0;
}
