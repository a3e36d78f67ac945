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

#include "core/machine_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace tmark {

namespace {

struct Tok {
    std::string text;
    int col;  // 1-based
};

std::vector<Tok> tokenize(const std::string& line) {
    std::vector<Tok> toks;
    size_t i = 0;
    while (i < line.size()) {
        char c = line[i];
        if (c == '#') break;
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
               line[i] != '#')
            ++i;
        toks.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return toks;
}

struct RawHeader {
    std::vector<Tok> toks;  // tokens after the key
    int line = 0;
};

Move parse_move(const Tok& t, int line) {
    if (t.text == "L") return Move::L;
    if (t.text == "R") return Move::R;
    if (t.text == "S") return Move::S;
    throw ParseError("move must be L, R or S, got '" + t.text + "'", line, t.col);
}

}  // namespace

Machine parse_tm(const std::string& text, const std::string& name) {
    static const std::vector<std::string> kKeys = {"states", "start",        "final",
                                                   "blank",  "tape_symbols", "tapes"};
    std::map<std::string, RawHeader> headers;

    Machine m;
    m.name = name;
    std::map<std::string, State> state_idx;
    bool headers_resolved = false;

    auto resolve_headers = [&](int at_line) {
        for (const auto& k : kKeys)
            if (!headers.count(k))
                throw ParseError("missing required header '" + k + ":'", at_line, 1);

        const RawHeader& hs = headers["states"];
        if (hs.toks.empty()) throw ParseError("'states:' lists no states", hs.line, 1);
        for (const Tok& t : hs.toks) {
            if (state_idx.count(t.text))
                throw ParseError("duplicate state '" + t.text + "'", hs.line, t.col);
            state_idx[t.text] = static_cast<State>(m.states.size());
            m.states.push_back(t.text);
        }
        m.is_final.assign(m.states.size(), 0);

        const RawHeader& hstart = headers["start"];
        if (hstart.toks.size() != 1)
            throw ParseError("'start:' must name exactly one state", hstart.line, 1);
        auto it = state_idx.find(hstart.toks[0].text);
        if (it == state_idx.end())
            throw ParseError("start state '" + hstart.toks[0].text + "' is not declared",
                             hstart.line, hstart.toks[0].col);
        m.start = it->second;

        for (const Tok& t : headers["final"].toks) {
            auto fit = state_idx.find(t.text);
            if (fit == state_idx.end())
                throw ParseError("final state '" + t.text + "' is not declared",
                                 headers["final"].line, t.col);
            m.is_final[static_cast<size_t>(fit->second)] = 1;
        }

        const RawHeader& hsym = headers["tape_symbols"];
        if (hsym.toks.empty())
            throw ParseError("'tape_symbols:' lists no symbols", hsym.line, 1);
        for (const Tok& t : hsym.toks) {
            if (m.alphabet.find(t.text) >= 0)
                throw ParseError("duplicate symbol '" + t.text + "'", hsym.line, t.col);
            m.alphabet.intern(t.text);
        }

        const RawHeader& hb = headers["blank"];
        if (hb.toks.size() != 1)
            throw ParseError("'blank:' must name exactly one symbol", hb.line, 1);
        Sym b = m.alphabet.find(hb.toks[0].text);
        if (b < 0)
            throw ParseError("blank symbol '" + hb.toks[0].text +
                                 "' is not listed in tape_symbols",
                             hb.line, hb.toks[0].col);
        m.alphabet.blank = b;

        const RawHeader& ht = headers["tapes"];
        if (ht.toks.empty()) throw ParseError("'tapes:' lists no tapes", ht.line, 1);
        for (const Tok& t : ht.toks) {
            TapeDecl td{TapeRole::Work, 1};
            std::string spec = t.text;
            size_t colon = spec.find(':');
            std::string role = colon == std::string::npos ? spec : spec.substr(0, colon);
            if (colon != std::string::npos) {
                std::string n = spec.substr(colon + 1);
                if (n.empty() || n.find_first_not_of("0123456789") != std::string::npos)
                    throw ParseError("tape track count must be a positive integer", ht.line,
                                     t.col);
                td.tracks = std::stoi(n);
                if (td.tracks < 1)
                    throw ParseError("tape track count must be positive", ht.line, t.col);
            }
            if (role == "input") td.role = TapeRole::Input;
            else if (role == "work") td.role = TapeRole::Work;
            else if (role == "output") td.role = TapeRole::Output;
            else
                throw ParseError("tape role must be input, work or output, got '" + role + "'",
                                 ht.line, t.col);
            m.tapes.push_back(td);
        }
        headers_resolved = true;
    };

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<Tok> toks = tokenize(line);
        if (toks.empty()) continue;

        const std::string& first = toks[0].text;
        if (!first.empty() && first.back() == ':') {
            std::string key = first.substr(0, first.size() - 1);
            if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end())
                throw ParseError("unknown header key '" + key + "'", line_no, toks[0].col);
            if (headers_resolved)
                throw ParseError("header '" + key + ":' appears after the first transition",
                                 line_no, toks[0].col);
            if (headers.count(key))
                throw ParseError("duplicate header '" + key + ":'", line_no, toks[0].col);
            RawHeader h;
            h.line = line_no;
            h.toks.assign(toks.begin() + 1, toks.end());
            headers[key] = std::move(h);
            continue;
        }

        // Transition line.
        if (!headers_resolved) resolve_headers(line_no);
        int T = m.tape_count();
        size_t expect = static_cast<size_t>(3 * T + 4);
        if (toks.size() != expect)
            throw ParseError("transition line needs " + std::to_string(expect) +
                                 " tokens for " + std::to_string(T) + " tapes, got " +
                                 std::to_string(toks.size()),
                             line_no, toks[0].col);
        size_t arrow = static_cast<size_t>(T) + 1;
        size_t moves_kw = static_cast<size_t>(2 * T) + 3;
        if (toks[arrow].text != "->")
            throw ParseError("expected '->'", line_no, toks[arrow].col);
        if (toks[moves_kw].text != "moves")
            throw ParseError("expected 'moves'", line_no, toks[moves_kw].col);

        auto state_of = [&](const Tok& t) -> State {
            auto it = state_idx.find(t.text);
            if (it == state_idx.end())
                throw ParseError("state '" + t.text + "' is not declared", line_no, t.col);
            return it->second;
        };
        auto tuple_of = [&](const Tok& t, int tape) -> std::vector<Sym> {
            std::vector<Sym> syms;
            size_t pos = 0;
            const std::string& s = t.text;
            while (true) {
                size_t comma = s.find(',', pos);
                std::string part =
                    comma == std::string::npos ? s.substr(pos) : s.substr(pos, comma - pos);
                Sym sym = part.empty() ? -1 : m.alphabet.find(part);
                if (sym < 0)
                    throw ParseError("symbol '" + part + "' is not in tape_symbols", line_no,
                                     t.col);
                syms.push_back(sym);
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
            int want = m.tapes[static_cast<size_t>(tape)].tracks;
            if (static_cast<int>(syms.size()) != want)
                throw ParseError("tape " + std::to_string(tape + 1) + " has " +
                                     std::to_string(want) + " tracks but tuple '" + s +
                                     "' has " + std::to_string(syms.size()),
                                 line_no, t.col);
            return syms;
        };

        Transition tr;
        tr.from = state_of(toks[0]);
        tr.to = state_of(toks[arrow + 1]);
        for (int i = 0; i < T; ++i) {
            auto r = tuple_of(toks[static_cast<size_t>(1 + i)], i);
            tr.read.insert(tr.read.end(), r.begin(), r.end());
            auto w = tuple_of(toks[arrow + 2 + static_cast<size_t>(i)], i);
            tr.write.insert(tr.write.end(), w.begin(), w.end());
            tr.moves.push_back(parse_move(toks[moves_kw + 1 + static_cast<size_t>(i)], line_no));
        }
        m.transitions.push_back(std::move(tr));
    }

    if (!headers_resolved) resolve_headers(line_no == 0 ? 1 : line_no);
    m.finalize();
    m.validate_or_throw();
    return m;
}

std::string write_tm(const Machine& m) {
    std::ostringstream os;
    os << "states:";
    for (const auto& s : m.states) os << ' ' << s;
    os << "\nstart: " << m.states[static_cast<size_t>(m.start)];
    os << "\nfinal:";
    for (size_t i = 0; i < m.states.size(); ++i)
        if (m.is_final[i]) os << ' ' << m.states[i];
    os << "\nblank: " << m.alphabet.name(m.alphabet.blank);
    os << "\ntape_symbols:";
    for (const auto& s : m.alphabet.symbols) os << ' ' << s;
    os << "\ntapes:";
    for (const TapeDecl& t : m.tapes) {
        os << ' ';
        switch (t.role) {
            case TapeRole::Input: os << "input"; break;
            case TapeRole::Work: os << "work"; break;
            case TapeRole::Output: os << "output"; break;
        }
        if (t.tracks != 1) os << ':' << t.tracks;
    }
    os << '\n';

    std::vector<int> off(m.tapes.size() + 1, 0);
    for (size_t i = 0; i < m.tapes.size(); ++i) off[i + 1] = off[i] + m.tapes[i].tracks;

    for (const Transition& t : m.transitions) {
        os << m.states[static_cast<size_t>(t.from)];
        for (size_t i = 0; i < m.tapes.size(); ++i) {
            os << ' ';
            for (int k = off[i]; k < off[i + 1]; ++k) {
                if (k > off[i]) os << ',';
                os << m.alphabet.name(t.read[static_cast<size_t>(k)]);
            }
        }
        os << " -> " << m.states[static_cast<size_t>(t.to)];
        for (size_t i = 0; i < m.tapes.size(); ++i) {
            os << ' ';
            for (int k = off[i]; k < off[i + 1]; ++k) {
                if (k > off[i]) os << ',';
                os << m.alphabet.name(t.write[static_cast<size_t>(k)]);
            }
        }
        os << " moves";
        for (Move mv : t.moves) os << ' ' << move_char(mv);
        os << '\n';
    }
    return os.str();
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << content;
    if (!f) throw IoError("failed while writing '" + path + "'");
}

Machine load_machine(const std::string& path) {
    std::string text = read_text_file(path);
    return parse_tm(text, std::filesystem::path(path).stem().string());
}

void save_machine(const Machine& m, const std::string& path) {
    write_text_file(path, write_tm(m));
}

std::vector<uint8_t> canonical_bytes(const Machine& m) {
    if (m.track_offset.size() != m.tapes.size() + 1)
        throw ArgError("machine must be finalized before serialization");
    std::vector<uint8_t> out;
    out.reserve(64 + m.transitions.size() * (static_cast<size_t>(m.total_tracks) * 2 + 6));
    out.push_back('T');
    out.push_back('M');
    out.push_back('K');
    out.push_back('1');
    out.push_back(1);  // version
    put_varint(out, static_cast<uint64_t>(m.state_count()));
    put_varint(out, static_cast<uint64_t>(m.start));
    uint64_t n_final = 0;
    for (uint8_t f : m.is_final) n_final += f;
    put_varint(out, n_final);
    for (size_t i = 0; i < m.is_final.size(); ++i)
        if (m.is_final[i]) put_varint(out, i);
    put_varint(out, m.tapes.size());
    for (const TapeDecl& t : m.tapes) {
        out.push_back(static_cast<uint8_t>(t.role));
        put_varint(out, static_cast<uint64_t>(t.tracks));
    }
    put_varint(out, m.alphabet.symbols.size());
    put_varint(out, static_cast<uint64_t>(m.alphabet.blank));
    put_varint(out, static_cast<uint64_t>(m.alphabet.zero));
    put_varint(out, static_cast<uint64_t>(m.alphabet.one));
    put_varint(out, static_cast<uint64_t>(m.alphabet.query + 1));  // 0 when absent
    put_varint(out, m.transitions.size());
    for (const Transition& t : m.transitions) {
        put_varint(out, static_cast<uint64_t>(t.from));
        put_varint(out, static_cast<uint64_t>(t.to));
        for (Sym s : t.read) put_varint(out, static_cast<uint64_t>(s));
        for (Sym s : t.write) put_varint(out, static_cast<uint64_t>(s));
        for (Move mv : t.moves) out.push_back(static_cast<uint8_t>(mv));
    }
    return out;
}

uint64_t structural_hash(const Machine& m) {
    auto b = canonical_bytes(m);
    return fnv1a64(b.data(), b.size());
}

}  // namespace tmark
