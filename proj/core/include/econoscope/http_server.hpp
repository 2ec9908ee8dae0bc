#pragma once

#include "econoscope/service.hpp"

#include <memory>
#include <string>

namespace econoscope {

/// HTTP front end for a WhatIfService.
class HttpServer {
public:
    explicit HttpServer(const WhatIfService& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds to host:port (port 0 picks a free port) and returns the bound
    /// port. Throws std::runtime_error on failure.
    int bind(const std::string& host, int port);
    /// Serves until stop() is called. Requires a successful bind().
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace econoscope
