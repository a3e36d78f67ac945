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

#include "core/signature.hpp"

#include <sstream>

#include "core/crypto.hpp"
#include "core/machine_io.hpp"
#include "core/rng.hpp"
#include "core/util.hpp"

namespace tmark {

SignatureKey make_key(std::vector<uint8_t> secret, std::vector<uint8_t> salt, int n0) {
    if (secret.size() < 16) throw ArgError("key secret must be at least 16 bytes");
    if (salt.empty()) throw ArgError("key salt must be non-empty");
    if (n0 < 2) throw ArgError("n0 must be at least 2");
    return SignatureKey{std::move(secret), std::move(salt), n0};
}

SignatureKey derive_key(const std::string& seed_hex, int n0) {
    Rng rng = Rng::from_hex(seed_hex);
    Rng rs = rng.fork("secret");
    Rng rt = rng.fork("salt");
    std::vector<uint8_t> secret(32), salt(16);
    for (size_t i = 0; i < secret.size(); i += 8) {
        uint64_t v = rs.next();
        for (size_t j = 0; j < 8; ++j) secret[i + j] = static_cast<uint8_t>(v >> (8 * j));
    }
    for (size_t i = 0; i < salt.size(); i += 8) {
        uint64_t v = rt.next();
        for (size_t j = 0; j < 8; ++j) salt[i + j] = static_cast<uint8_t>(v >> (8 * j));
    }
    return make_key(std::move(secret), std::move(salt), n0);
}

std::string f_eval(const SignatureKey& key, uint64_t n) {
    if (n < 1) throw ArgError("f_eval requires n >= 1");
    if (n > 4096) throw ArgError("f_eval length cap is 4096 bits");
    KeyedBits bits(key.secret, "element:" + std::to_string(n));
    std::string out(static_cast<size_t>(n), '0');
    for (uint64_t i = 0; i < n; ++i)
        if (bits.bit(i)) out[static_cast<size_t>(i)] = '1';
    return out;
}

bool member(const SignatureKey& key, const std::string& x) {
    if (x.size() <= static_cast<size_t>(key.n0)) return false;
    if (x.size() > 4096) return false;
    for (char c : x)
        if (c != '0' && c != '1') return false;
    return x == f_eval(key, x.size());
}

std::string element_at(const SignatureKey& key, uint64_t n) {
    if (n <= static_cast<uint64_t>(key.n0))
        throw ArgError("element_at requires n > n0 (= " + std::to_string(key.n0) + ")");
    return f_eval(key, n);
}

int response_bit_at(const SignatureKey& key, uint64_t n) {
    std::string label = "response:";
    label.append(key.salt.begin(), key.salt.end());
    KeyedBits bits(key.secret, label);
    return bits.bit(n);
}

int response_bit(const SignatureKey& key, const std::string& x) {
    if (!member(key, x)) throw ArgError("response_bit is defined only on set members");
    return response_bit_at(key, x.size());
}

std::string write_key(const SignatureKey& key) {
    std::ostringstream os;
    os << "secret: " << hex_encode(key.secret) << "\n";
    os << "salt: " << hex_encode(key.salt) << "\n";
    os << "n0: " << key.n0 << "\n";
    return os.str();
}

SignatureKey parse_key(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::vector<uint8_t> secret, salt;
    bool have_secret = false, have_salt = false, have_n0 = false;
    int n0 = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw)) continue;
        std::string val;
        ls >> val;
        std::string extra;
        if (ls >> extra) throw ParseError("unexpected token '" + extra + "'", line_no, 1);
        try {
            if (kw == "secret:") {
                if (have_secret) throw ArgError("duplicate 'secret:'");
                secret = hex_decode(val);
                have_secret = true;
            } else if (kw == "salt:") {
                if (have_salt) throw ArgError("duplicate 'salt:'");
                salt = hex_decode(val);
                have_salt = true;
            } else if (kw == "n0:") {
                if (have_n0) throw ArgError("duplicate 'n0:'");
                size_t pos = 0;
                n0 = std::stoi(val, &pos);
                if (pos != val.size()) throw ArgError("n0 must be an integer");
                have_n0 = true;
            } else {
                throw ArgError("unknown key-file field '" + kw + "'");
            }
        } catch (const ArgError& e) {
            throw ParseError(e.what(), line_no, 1);
        }
    }
    if (!have_secret || !have_salt || !have_n0)
        throw ParseError("key file needs 'secret:', 'salt:' and 'n0:' fields", line_no + 1, 1);
    try {
        return make_key(std::move(secret), std::move(salt), n0);
    } catch (const ArgError& e) {
        throw ParseError(e.what(), line_no + 1, 1);
    }
}

SignatureKey load_key(const std::string& path) { return parse_key(read_text_file(path)); }

void save_key(const SignatureKey& key, const std::string& path) {
    write_text_file(path, write_key(key));
}

}  // namespace tmark
