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

#include "core/util.hpp"

namespace tmark {

// splitmix64: small, fast, and identical on every platform. All randomness in
// the toolkit flows through explicit seeds; there is no ambient entropy.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    // Seed from an arbitrary byte string (e.g. a user-supplied hex seed).
    static Rng from_bytes(const std::vector<uint8_t>& bytes) {
        return Rng(fnv1a64(bytes.data(), bytes.size()));
    }

    static Rng from_hex(const std::string& hex) { return from_bytes(hex_decode(hex)); }

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform value in [0, n) without std::uniform_int_distribution (whose
    // output is implementation-defined). Rejection sampling keeps it unbiased.
    uint64_t below(uint64_t n) {
        if (n == 0) return 0;
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v = next();
        while (v >= limit) v = next();
        return v % n;
    }

    bool boolean() { return (next() & 1) != 0; }

    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Child generator for a named purpose; derivation is order-independent.
    Rng fork(const std::string& label) const {
        uint64_t h = fnv1a64(reinterpret_cast<const uint8_t*>(label.data()), label.size(), state_ ^ 0x5851f42d4c957f2dull);
        return Rng(h);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Random permutation of {0, ..., n-1} by seeded Fisher-Yates.
    std::vector<int> permutation(int n) {
        std::vector<int> p(n);
        for (int i = 0; i < n; ++i) p[i] = i;
        shuffle(p);
        return p;
    }

private:
    uint64_t state_;
};

}  // namespace tmark
