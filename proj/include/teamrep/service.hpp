#pragma once

// Read-only HTTP facade: GET /v1/network/stats, POST /v1/recommend,
// POST /v1/whatif. The routing and payload logic is a pure function of the
// request (ApiService::handle) so it can be tested without sockets.

#include "teamrep/network.hpp"
#include "teamrep/replacement.hpp"

#include <memory>
#include <string>
#include <string_view>

namespace httplib {
class Server;
}

namespace teamrep {

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON, newline-terminated
};

class ApiService {
 public:
  explicit ApiService(LabeledNetwork net, TeamCatalog catalog = {}, ScoringOptions options = {});

  ApiResponse handle(std::string_view method, std::string_view path, std::string_view body) const;

  ApiResponse stats() const;
  ApiResponse recommend(std::string_view body) const;
  ApiResponse whatif(std::string_view body) const;

  const LabeledNetwork& network() const noexcept { return net_; }
  const TeamCatalog& catalog() const noexcept { return catalog_; }

 private:
  LabeledNetwork net_;
  TeamCatalog catalog_;
  ScoringOptions options_;
};

/// httplib server bound to an ApiService, with CORS headers on every reply.
class HttpFrontend {
 public:
  explicit HttpFrontend(const ApiService& service, std::string allow_origin = "*");
  ~HttpFrontend();
  HttpFrontend(const HttpFrontend&) = delete;
  HttpFrontend& operator=(const HttpFrontend&) = delete;

  /// Binds to `port` (0 picks a free one). Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  bool listen();
  void stop();
  void wait_until_ready() const;

 private:
  const ApiService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace teamrep
