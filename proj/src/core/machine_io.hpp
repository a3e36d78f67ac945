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

#include <string>
#include <vector>

#include "core/machine.hpp"

namespace tmark {

// Text format (".tm"): six header lines
//   states: q0 q1 ...
//   start: q0
//   final: q3 ...
//   blank: _
//   tape_symbols: 0 1 _ ? ...
//   tapes: input work:k ... output
// followed by one transition per line:
//   from r1 ... rT -> to w1 ... wT moves m1 ... mT
// where a multi-track tape's read/write is a comma-joined tuple.
// '#' starts a comment; unknown header keys are parse errors.
Machine parse_tm(const std::string& text, const std::string& name = "machine");
std::string write_tm(const Machine& m);

Machine load_machine(const std::string& path);
void save_machine(const Machine& m, const std::string& path);

// Compact structural serialization used by the static scanner and for
// structural hashing: indices only, no state or symbol names, transitions in
// canonical (from, read-tuple) order. Two machines that differ only in
// naming serialize identically.
std::vector<uint8_t> canonical_bytes(const Machine& m);
uint64_t structural_hash(const Machine& m);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace tmark
