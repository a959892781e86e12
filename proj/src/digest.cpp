#include "cor/digest.hpp"

#include "cor/error.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <sstream>

namespace cor::digest {

namespace {

std::string evp_hex(const EVP_MD* md, std::string_view a, std::string_view b = {}) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), md, nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), a.data(), a.size()) != 1 ||
        EVP_DigestUpdate(ctx.get(), b.data(), b.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1) {
        throw Error("digest computation failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        hex.push_back(kHex[out[i] >> 4]);
        hex.push_back(kHex[out[i] & 0xF]);
    }
    return hex;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
    return evp_hex(EVP_sha256(), data);
}

std::string git_blob_id(std::string_view content) {
    std::string header = "blob " + std::to_string(content.size());
    header.push_back('\0');
    return evp_hex(EVP_sha1(), header, content);
}

std::string git_blob_id_of_file(const std::filesystem::path& path) {
    return git_blob_id(read_file(path));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

}  // namespace cor::digest
