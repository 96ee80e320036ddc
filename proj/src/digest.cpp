#include "faithfulrag/digest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>

#include "faithfulrag/errors.hpp"

namespace faithfulrag::digest {

namespace {

std::string to_hex(const unsigned char* bytes, size_t n) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(n * 2);
    for (size_t i = 0; i < n; ++i) {
        out.push_back(digits[bytes[i] >> 4]);
        out.push_back(digits[bytes[i] & 0x0f]);
    }
    return out;
}

struct EvpCtx {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    ~EvpCtx() { EVP_MD_CTX_free(ctx); }
};

} // namespace

std::string sha256_hex(std::string_view data) {
    EvpCtx c;
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!c.ctx || EVP_DigestInit_ex(c.ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(c.ctx, data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(c.ctx, md, &len) != 1) {
        throw IoError("SHA-256 digest failed");
    }
    return to_hex(md, len);
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    EvpCtx c;
    if (!c.ctx || EVP_DigestInit_ex(c.ctx, EVP_sha256(), nullptr) != 1)
        throw IoError("SHA-256 digest failed");
    std::array<char, 1 << 16> buf;
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        std::streamsize got = in.gcount();
        if (got > 0 && EVP_DigestUpdate(c.ctx, buf.data(), static_cast<size_t>(got)) != 1)
            throw IoError("SHA-256 digest failed");
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(c.ctx, md, &len) != 1) throw IoError("SHA-256 digest failed");
    return to_hex(md, len);
}

} // namespace faithfulrag::digest
