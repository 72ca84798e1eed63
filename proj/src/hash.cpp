#include "m3pipe/hash.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>

#include "m3pipe/errors.hpp"

namespace m3pipe {

namespace {

std::string to_hex(const unsigned char* digest, std::size_t len) {
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (std::size_t i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace

Sha256Stream::Sha256Stream() {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw Error("failed to initialize SHA-256 context");
  }
  ctx_ = ctx;
}

Sha256Stream::~Sha256Stream() {
  if (ctx_ != nullptr) EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_));
}

void Sha256Stream::update(std::string_view data) {
  if (EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size()) != 1) {
    throw Error("SHA-256 update failed");
  }
}

std::string Sha256Stream::hex_digest() {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), digest, &len) != 1) {
    throw Error("SHA-256 finalization failed");
  }
  return to_hex(digest, len);
}

std::string sha256_hex(std::string_view data) {
  Sha256Stream stream;
  stream.update(data);
  return stream.hex_digest();
}

std::string sha256_file_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file for hashing: " + path);
  Sha256Stream stream;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    std::streamsize got = in.gcount();
    if (got > 0) stream.update(std::string_view(buf, static_cast<std::size_t>(got)));
  }
  return stream.hex_digest();
}

}  // namespace m3pipe
