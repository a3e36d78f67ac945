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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tmark {

// HMAC-SHA256(key, message) -> 32 bytes. Thin wrapper over OpenSSL's EVP_MAC.
std::vector<uint8_t> hmac_sha256(const std::vector<uint8_t>& key,
                                 const std::vector<uint8_t>& message);

// Keyed pseudorandom bit stream: bit i of the stream defined by (key, label).
// Blocks are HMAC-SHA256(key, label || be64(block_index)); bits are consumed
// MSB-first within each 32-byte block.
class KeyedBits {
public:
    KeyedBits(std::vector<uint8_t> key, std::string label);
    int bit(uint64_t index);  // 0 or 1

private:
    std::vector<uint8_t> key_;
    std::string label_;
    uint64_t cached_block_ = UINT64_MAX;
    std::vector<uint8_t> block_;
};

}  // namespace tmark
