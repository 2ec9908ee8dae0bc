#pragma once

#include "econoscope/models/model.hpp"

#include <memory>
#include <string>
#include <string_view>

namespace econoscope {

struct HttpResponse {
    int status = 200;
    std::string body;
};

/// Request handling for the JSON API, independent of any HTTP server.
///   POST /v1/predict  round-start state -> outcome probabilities
///   POST /v1/whatif   round-start state + side -> every feasible buy scored
///   GET  /v1/meta     loaded model description
///   GET  /v1/health   200 iff a model is loaded
class WhatIfService {
public:
    explicit WhatIfService(std::shared_ptr<const TrainedModel> model = nullptr, int rounds_to_win = 16);

    HttpResponse predict(std::string_view body) const;
    HttpResponse whatif(std::string_view body) const;
    HttpResponse meta() const;
    HttpResponse health() const;
    /// Routes by method and path; unknown routes give 404.
    HttpResponse handle(std::string_view method, std::string_view path, std::string_view body) const;

    const TrainedModel* model() const noexcept { return model_.get(); }

private:
    std::shared_ptr<const TrainedModel> model_;
    int rounds_to_win_;
};

/// "host:port" or ":port" (all interfaces); throws std::invalid_argument.
std::pair<std::string, int> parse_listen_address(std::string_view address);

}  // namespace econoscope
