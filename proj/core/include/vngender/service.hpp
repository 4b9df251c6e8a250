#pragma once

#include "vngender/bundle.hpp"

#include <memory>
#include <string>
#include <string_view>

namespace vngender {

struct NamePrediction {
    int label = 1;
    double score = 0.5;
    NameComponents components;
};

/// normalize → segment → select with the bundle's mask → predict.
/// Throws EmptyNameError or DataError("empty_selection").
NamePrediction predict_name(const ModelBundle& bundle, std::string_view raw_name);

struct HttpResponse {
    int status = 200;
    std::string body;
};

/// Request handling for the prediction API, independent of the transport.
///
///   POST /predict  {"name": "..."}  -> {"label","gender","score","components","model_id"}
///   GET  /health                     -> {"status":"ok","model_id":...}
///
/// Errors carry {"error": <code>, "message": <text>}: 400 for malformed
/// JSON, a missing or empty name; 404 for unknown routes; 405 for a known
/// route with the wrong method.
class PredictionService {
public:
    explicit PredictionService(std::shared_ptr<const ModelBundle> bundle);

    HttpResponse handle(std::string_view method, std::string_view path, std::string_view body) const;
    HttpResponse predict(std::string_view body) const;
    HttpResponse health() const;

    const ModelBundle& bundle() const { return *bundle_; }

private:
    std::shared_ptr<const ModelBundle> bundle_;
};

/// HTTP/1.1 front end for PredictionService.
class HttpServer {
public:
    explicit HttpServer(std::shared_ptr<const ModelBundle> bundle);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds "host:port" (port 0 picks a free one) and returns the port.
    int bind(const std::string& address);
    /// Serves until stop() is called from another thread.
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Blocking convenience wrapper: bind and serve until the process ends.
void serve(std::shared_ptr<const ModelBundle> bundle, const std::string& address);

} // namespace vngender
