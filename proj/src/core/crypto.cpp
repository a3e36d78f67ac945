// Copyright 2026 The tmark Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "core/crypto.hpp"

#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/params.h>

#include <memory>
#include <stdexcept>

#include "core/util.hpp"

namespace tmark {

namespace {

struct MacDeleter {
    void operator()(EVP_MAC* m) const { EVP_MAC_free(m); }
};
struct CtxDeleter {
    void operator()(EVP_MAC_CTX* c) const { EVP_MAC_CTX_free(c); }
};

EVP_MAC* hmac_impl() {
    static std::unique_ptr<EVP_MAC, MacDeleter> mac(
        EVP_MAC_fetch(nullptr, "HMAC", nullptr));
    if (!mac) throw std::runtime_error("OpenSSL: HMAC implementation unavailable");
    return mac.get();
}

}  // namespace

std::vector<uint8_t> hmac_sha256(const std::vector<uint8_t>& key,
                                 const std::vector<uint8_t>& message) {
    std::unique_ptr<EVP_MAC_CTX, CtxDeleter> ctx(EVP_MAC_CTX_new(hmac_impl()));
    if (!ctx) throw std::runtime_error("OpenSSL: EVP_MAC_CTX_new failed");

    char digest[] = "SHA256";
    OSSL_PARAM params[] = {
        OSSL_PARAM_construct_utf8_string(OSSL_MAC_PARAM_DIGEST, digest, 0),
        OSSL_PARAM_construct_end(),
    };
    if (EVP_MAC_init(ctx.get(), key.data(), key.size(), params) != 1)
        throw std::runtime_error("OpenSSL: EVP_MAC_init failed");
    if (EVP_MAC_update(ctx.get(), message.data(), message.size()) != 1)
        throw std::runtime_error("OpenSSL: EVP_MAC_update failed");

    std::vector<uint8_t> out(32);
    size_t out_len = 0;
    if (EVP_MAC_final(ctx.get(), out.data(), &out_len, out.size()) != 1)
        throw std::runtime_error("OpenSSL: EVP_MAC_final failed");
    out.resize(out_len);
    if (out.size() != 32) throw std::runtime_error("OpenSSL: unexpected HMAC-SHA256 length");
    return out;
}

KeyedBits::KeyedBits(std::vector<uint8_t> key, std::string label)
    : key_(std::move(key)), label_(std::move(label)) {}

int KeyedBits::bit(uint64_t index) {
    uint64_t block_index = index / 256;
    if (block_index != cached_block_) {
        std::vector<uint8_t> msg(label_.begin(), label_.end());
        for (int i = 7; i >= 0; --i)
            msg.push_back(static_cast<uint8_t>((block_index >> (8 * i)) & 0xff));
        block_ = hmac_sha256(key_, msg);
        cached_block_ = block_index;
    }
    uint64_t bit_in_block = index % 256;
    uint8_t byte = block_[bit_in_block / 8];
    return (byte >> (7 - bit_in_block % 8)) & 1;
}

}  // namespace tmark
