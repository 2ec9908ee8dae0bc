#include "econoscope/http_server.hpp"

#include <httplib.h>

#include <stdexcept>

namespace econoscope {

struct HttpServer::Impl {
    const WhatIfService& service;
    httplib::Server server;

    explicit Impl(const WhatIfService& s) : service(s) {
        auto route = [this](const httplib::Request& req, httplib::Response& res) {
            const HttpResponse r = service.handle(req.method, req.path, req.body);
            res.status = r.status;
            res.set_content(r.body, "application/json");
        };
        server.Get(R"(/.*)", route);
        server.Post(R"(/.*)", route);
        server.Put(R"(/.*)", route);
        server.Delete(R"(/.*)", route);
    }
};

HttpServer::HttpServer(const WhatIfService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw std::runtime_error("cannot bind to " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) {
        throw std::runtime_error("cannot bind to " + host + ":" + std::to_string(port));
    }
    return port;
}

void HttpServer::run() {
    if (!impl_->server.listen_after_bind()) throw std::runtime_error("HTTP server stopped with an error");
}

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

}  // namespace econoscope
