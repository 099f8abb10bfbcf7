#include "decwatt/server.hpp"

#include <httplib.h>

#include <thread>

#include "decwatt/json_io.hpp"

namespace decwatt::collect {

struct CollectorServer::Impl {
  Impl(ServerConfig c) : cfg(std::move(c)), store(cfg.data_dir, cfg.salt) {}

  ServerConfig cfg;
  CollectorStore store;
  httplib::Server svr;
  std::thread thread;
  int bound_port = -1;

  void wire() {
    svr.Post("/v1/submissions",
             [this](const httplib::Request& req, httplib::Response& res) {
               IngestResult r;
               try {
                 r = store.ingest_json(req.body);
               } catch (const std::exception& e) {
                 res.status = 500; // storage failure: retriable, nothing written
                 res.set_content(json{{"error", e.what()}, {"retriable", true}}.dump(),
                                 "application/json");
                 return;
               }
               json body{{"verdict", to_string(r.verdict)}};
               if (!r.reasons.empty()) body["reasons"] = r.reasons;
               if (r.verdict != Verdict::rejected_invalid)
                 body["key"] = json{{"serial_prefix", r.key.serial_hash.substr(0, 12)},
                                    {"build_host", r.key.build_host}};
               res.status = r.verdict == Verdict::rejected_invalid ? 400 : 200;
               res.set_content(body.dump(), "application/json");
             });

    svr.Get("/v1/completeness",
            [this](const httplib::Request&, httplib::Response& res) {
              json rows = json::array();
              for (const auto& row : store.completeness_report()) {
                rows.push_back(json{{"model", row.model},
                                    {"serial_prefix", row.serial_prefix},
                                    {"build_host", row.build_host},
                                    {"completeness", row.completeness},
                                    {"status", session::to_string(row.status)}});
              }
              store.sync_index();
              res.set_content(rows.dump(), "application/json");
            });

    svr.Get("/v1/export", [this](const httplib::Request& req, httplib::Response& res) {
      std::string error;
      const auto filter = parse_export_filter(req.get_param_value("model"),
                                              req.get_param_value("standard"),
                                              req.get_param_value("kind"), &error);
      if (!filter) {
        res.status = 400;
        res.set_content(json{{"error", error}}.dump(), "application/json");
        return;
      }
      store.sync_index();
      res.set_content(store.export_raw(*filter), "application/x-ndjson");
    });
  }
};

CollectorServer::CollectorServer(ServerConfig cfg)
    : impl_(std::make_unique<Impl>(std::move(cfg))) {
  impl_->wire();
}

CollectorServer::~CollectorServer() { stop(); }

int CollectorServer::start() {
  auto& impl = *impl_;
  if (impl.cfg.port == 0) {
    impl.bound_port = impl.svr.bind_to_any_port(impl.cfg.host);
  } else {
    if (!impl.svr.bind_to_port(impl.cfg.host, impl.cfg.port)) return -1;
    impl.bound_port = impl.cfg.port;
  }
  if (impl.bound_port < 0) return -1;
  impl.thread = std::thread([&impl] { impl.svr.listen_after_bind(); });
  impl.svr.wait_until_ready();
  return impl.bound_port;
}

bool CollectorServer::run() {
  auto& impl = *impl_;
  impl.bound_port = impl.cfg.port;
  return impl.svr.listen(impl.cfg.host, impl.cfg.port);
}

void CollectorServer::stop() {
  auto& impl = *impl_;
  if (impl.svr.is_running()) impl.svr.stop();
  if (impl.thread.joinable()) impl.thread.join();
  impl.store.sync_index();
}

CollectorStore& CollectorServer::store() { return impl_->store; }

} // namespace decwatt::collect
