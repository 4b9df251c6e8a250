#include "vngender/service.hpp"

#include "vngender/error.hpp"

#include <httplib.h>
#include <json.hpp>

namespace vngender {

NamePrediction predict_name(const ModelBundle& bundle, std::string_view raw_name) {
    NamePrediction out;
    out.components = parse_name(raw_name);
    const auto tokens = select_components(out.components, bundle.pipeline.mask);
    const Prediction p = bundle.pipeline.predict_tokens(tokens);
    out.label = p.label;
    out.score = p.score;
    return out;
}

namespace {

HttpResponse error_response(int status, std::string_view code, std::string_view message) {
    nlohmann::json j{{"error", code}, {"message", message}};
    return {status, j.dump()};
}

} // namespace

PredictionService::PredictionService(std::shared_ptr<const ModelBundle> bundle) : bundle_(std::move(bundle)) {
    if (!bundle_) throw ConfigError("prediction service needs a model bundle");
}

HttpResponse PredictionService::health() const {
    nlohmann::json j{{"status", "ok"}, {"model_id", bundle_->model_id}};
    return {200, j.dump()};
}

HttpResponse PredictionService::predict(std::string_view body) const {
    nlohmann::json req = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (req.is_discarded() || !req.is_object()) {
        return error_response(400, "malformed_json", "request body must be a JSON object");
    }
    auto it = req.find("name");
    if (it == req.end() || !it->is_string()) {
        return error_response(400, "missing_name", "request needs a string field 'name'");
    }

    NamePrediction p;
    try {
        p = predict_name(*bundle_, it->get_ref<const std::string&>());
    } catch (const EmptyNameError& e) {
        return error_response(400, e.code(), e.what());
    } catch (const DataError& e) {
        return error_response(400, e.code(), e.what());
    }

    nlohmann::json components{
        {"family", p.components.family ? nlohmann::json(*p.components.family) : nlohmann::json(nullptr)},
        {"middle", p.components.middle},
        {"given", p.components.given},
    };
    nlohmann::json res{
        {"label", p.label},
        {"gender", gender_name(p.label)},
        {"score", p.score},
        {"components", std::move(components)},
        {"model_id", bundle_->model_id},
    };
    return {200, res.dump()};
}

HttpResponse PredictionService::handle(std::string_view method, std::string_view path, std::string_view body) const {
    if (path == "/predict") {
        if (method != "POST") return error_response(405, "method_not_allowed", "use POST /predict");
        return predict(body);
    }
    if (path == "/health") {
        if (method != "GET") return error_response(405, "method_not_allowed", "use GET /health");
        return health();
    }
    return error_response(404, "not_found", "unknown route");
}

struct HttpServer::Impl {
    PredictionService service;
    httplib::Server server;

    explicit Impl(std::shared_ptr<const ModelBundle> bundle) : service(std::move(bundle)) {
        auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
            HttpResponse r = service.handle(req.method, req.path, req.body);
            res.status = r.status;
            if (r.status == 405) res.set_header("Allow", req.path == "/predict" ? "POST" : "GET");
            res.set_content(r.body, "application/json; charset=utf-8");
        };
        server.Get(".*", dispatch);
        server.Post(".*", dispatch);
        server.Put(".*", dispatch);
        server.Patch(".*", dispatch);
        server.Delete(".*", dispatch);
        server.Options(".*", dispatch);
    }
};

HttpServer::HttpServer(std::shared_ptr<const ModelBundle> bundle) : impl_(std::make_unique<Impl>(std::move(bundle))) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& address) {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos) throw ConfigError("bind address must be host:port, got '" + address + "'");
    const std::string host = address.substr(0, colon);
    int port = 0;
    try {
        port = std::stoi(address.substr(colon + 1));
    } catch (const std::exception&) {
        throw ConfigError("invalid port in bind address '" + address + "'");
    }
    if (port < 0 || port > 65535) throw ConfigError("port out of range in '" + address + "'");
    if (port == 0) {
        port = impl_->server.bind_to_any_port(host);
        if (port < 0) throw Error("bind_failed", "cannot bind " + address);
        return port;
    }
    if (!impl_->server.bind_to_port(host, port)) throw Error("bind_failed", "cannot bind " + address);
    return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

void serve(std::shared_ptr<const ModelBundle> bundle, const std::string& address) {
    HttpServer server(std::move(bundle));
    server.bind(address);
    server.run();
}

} // namespace vngender
