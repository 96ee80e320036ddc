#include "faithfulrag/transport.hpp"

#include <httplib.h>

namespace faithfulrag {

namespace {

class HttplibTransport : public Transport {
public:
    HttpResult post_json(const std::string& base_url, const std::string& path,
                         const std::vector<std::pair<std::string, std::string>>& headers,
                         const std::string& body) override {
        httplib::Client client(base_url);
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(300, 0);
        client.set_write_timeout(30, 0);
        httplib::Headers hdrs;
        for (const auto& [k, v] : headers) hdrs.emplace(k, v);
        auto res = client.Post(path, hdrs, body, "application/json");
        HttpResult out;
        if (!res) {
            out.status = 0;
            out.error = httplib::to_string(res.error());
            return out;
        }
        out.status = res->status;
        out.body = res->body;
        return out;
    }
};

} // namespace

std::unique_ptr<Transport> make_http_transport() {
    return std::make_unique<HttplibTransport>();
}

} // namespace faithfulrag
