// decwatt-collectd: HTTP collector for measurement submissions.

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <iostream>

#include "decwatt/server.hpp"

using namespace decwatt;

namespace {
collect::CollectorServer* g_server = nullptr;
void handle_signal(int) {
  if (g_server) g_server->stop();
}
std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v ? v : fallback;
}
} // namespace

int main(int argc, char** argv) {
  CLI::App app{"collector server for decoder power submissions"};

  std::string listen = env_or("DECWATT_LISTEN", "127.0.0.1:8787");
  std::string data_dir = env_or("DECWATT_DATA", "collect-data");
  std::string salt = env_or("DECWATT_SALT", "");

  app.add_option("--listen", listen, "host:port to listen on");
  app.add_option("--data", data_dir, "data directory (ingest log + index)");
  app.add_option("--salt", salt, "salt for serial-number hashing");

  CLI11_PARSE(app, argc, argv);

  if (salt.empty()) {
    std::cerr << "error: --salt (or DECWATT_SALT) is required; serials are stored "
                 "salted and hashed\n";
    return 1;
  }
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "error: --listen must be host:port\n";
    return 1;
  }

  try {
    collect::ServerConfig cfg;
    cfg.host = listen.substr(0, colon);
    cfg.port = std::stoi(listen.substr(colon + 1));
    cfg.data_dir = data_dir;
    cfg.salt = salt;

    collect::CollectorServer server(cfg);
    g_server = &server;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);

    std::cerr << "decwatt-collectd listening on " << listen << ", data under "
              << data_dir << "\n";
    if (!server.run()) {
      std::cerr << "error: cannot bind " << listen << "\n";
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
