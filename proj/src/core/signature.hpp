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

// Key behind the keyed sparse set: one secret string of length n for each
// length n > n0, plus a salt domain-separating the per-length response bits.
struct SignatureKey {
    std::vector<uint8_t> secret;  // >= 16 bytes
    std::vector<uint8_t> salt;    // non-empty
    int n0 = 0;                   // >= 2; no set elements at or below this length
};

// Validates field constraints and returns the key.
SignatureKey make_key(std::vector<uint8_t> secret, std::vector<uint8_t> salt, int n0);

// Deterministic key derivation from a hex seed (for --seed style generation).
SignatureKey derive_key(const std::string& seed_hex, int n0);

// The keyed length-preserving function: exactly n bits, leading zeros kept.
// HMAC-SHA256 in counter mode, truncated to n bits. n in [1, 4096].
std::string f_eval(const SignatureKey& key, uint64_t n);

// x is in the keyed set iff |x| > n0 and x equals the unique length-|x| value.
bool member(const SignatureKey& key, const std::string& x);

// The unique set element of length n (n > n0 required).
std::string element_at(const SignatureKey& key, uint64_t n);

// Deterministic response bit for set members; rejects non-members.
int response_bit(const SignatureKey& key, const std::string& x);

// Response bit by length (the bit the marker emits on the length-n element).
int response_bit_at(const SignatureKey& key, uint64_t n);

// Text format: "secret: <hex>", "salt: <hex>", "n0: <int>", one per line.
std::string write_key(const SignatureKey& key);
SignatureKey parse_key(const std::string& text);
SignatureKey load_key(const std::string& path);
void save_key(const SignatureKey& key, const std::string& path);

}  // namespace tmark
