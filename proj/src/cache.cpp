#include "faithfulrag/cache.hpp"

#include <fstream>
#include <sstream>

#include "faithfulrag/errors.hpp"

namespace faithfulrag {

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path ResponseCache::path_for(const std::string& digest) const {
    if (digest.size() < 3) throw ValidationError("cache digest too short: " + digest);
    return dir_ / digest.substr(0, 2) / (digest + ".json");
}

std::optional<nlohmann::json> ResponseCache::get(const std::string& digest) const {
    std::ifstream in(path_for(digest), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    nlohmann::json record = nlohmann::json::parse(ss.str(), nullptr, false);
    if (record.is_discarded()) return std::nullopt;
    return record;
}

bool ResponseCache::contains(const std::string& digest) const {
    return std::filesystem::exists(path_for(digest));
}

void ResponseCache::put(const std::string& digest, const nlohmann::json& record) {
    std::lock_guard<std::mutex> lock(write_mutex_);
    auto path = path_for(digest);
    std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write cache record: " + tmp.string());
        out << record.dump(2);
    }
    std::filesystem::rename(tmp, path);
}

} // namespace faithfulrag
