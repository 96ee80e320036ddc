#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

namespace faithfulrag {

/// Content-addressed store of JSON records, one file per digest under
/// {dir}/{first 2 hex}/{digest}.json. Writes go through a temp file and an
/// atomic rename, so concurrent readers always see complete records.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    std::optional<nlohmann::json> get(const std::string& digest) const;
    void put(const std::string& digest, const nlohmann::json& record);
    bool contains(const std::string& digest) const;

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path path_for(const std::string& digest) const;

    std::filesystem::path dir_;
    mutable std::mutex write_mutex_;
};

} // namespace faithfulrag
