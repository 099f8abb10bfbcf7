#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "decwatt/collector.hpp"

namespace decwatt::collect {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8787; // 0: pick an ephemeral port (tests)
  std::filesystem::path data_dir;
  std::string salt;
};

/// HTTP front of the CollectorStore:
///   POST /v1/submissions                     body: submission JSON -> verdict
///   GET  /v1/completeness                    -> rows, completeness ascending
///   GET  /v1/export?standard=&kind=&model=   -> JSONL sample stream
class CollectorServer {
public:
  explicit CollectorServer(ServerConfig cfg);
  ~CollectorServer();

  /// Binds and serves on a background thread; returns the bound port.
  int start();
  /// Serves on the calling thread until stop() (CLI entry point).
  bool run();
  void stop();

  CollectorStore& store();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace decwatt::collect
