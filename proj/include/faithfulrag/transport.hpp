#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace faithfulrag {

struct HttpResult {
    int status = 0; // 0 = transport-level failure, see error
    std::string body;
    std::string error;

    bool ok() const { return status >= 200 && status < 300; }
    bool transport_failed() const { return status == 0; }
};

/// Minimal HTTP seam so tests can inject fakes and scripted backends can be
/// proven to never touch the network.
class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResult post_json(const std::string& base_url, const std::string& path,
                                 const std::vector<std::pair<std::string, std::string>>& headers,
                                 const std::string& body) = 0;
};

/// httplib-backed transport (http and https base URLs).
std::unique_ptr<Transport> make_http_transport();

} // namespace faithfulrag
