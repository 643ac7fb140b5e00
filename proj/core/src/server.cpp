#include <httplib.h>

#include "fednlp/service.hpp"

namespace fednlp {

namespace {

void forward(const Engine& engine, const httplib::Request& in, httplib::Response& out) {
  HttpRequest req;
  req.method = in.method;
  req.path = in.path;
  for (const auto& [k, v] : in.params) req.query.emplace(k, v);
  req.body = in.body;
  const HttpResponse r = route(engine, req);
  out.status = r.status;
  for (const auto& [k, v] : r.headers) out.set_header(k, v);
  out.set_header("Access-Control-Allow-Origin", "*");
  out.set_content(r.body, r.content_type);
}

}  // namespace

bool serve(const Engine& engine, const ServeConfig& config) {
  httplib::Server server;
  if (config.static_dir && !server.set_mount_point("/", config.static_dir->string())) return false;

  auto handler = [&engine](const httplib::Request& in, httplib::Response& out) { forward(engine, in, out); };
  server.Get("/api/.*", handler);
  server.Post("/api/.*", handler);
  server.Options("/api/.*", [](const httplib::Request&, httplib::Response& out) {
    out.set_header("Access-Control-Allow-Origin", "*");
    out.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    out.set_header("Access-Control-Allow-Headers", "Content-Type");
    out.status = 204;
  });
  if (!server.bind_to_port(config.host, config.port)) return false;
  return server.listen_after_bind();
}

}  // namespace fednlp
