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

#include "core/equivalence.hpp"

namespace tmark {

std::string outcome_label(const RunOutcome& o) {
    switch (o.status) {
        case RunStatus::Halted: return "output=" + o.output;
        case RunStatus::BudgetExceeded: return "budget-exceeded";
        case RunStatus::Stuck: return "stuck";
    }
    return "unknown";
}

EquivalenceReport equivalent_on_inputs(const Machine& a, const Machine& b,
                                       const std::vector<std::string>& inputs,
                                       uint64_t budget) {
    EquivalenceReport rep;
    for (const std::string& x : inputs) {
        RunOutcome oa = run(a, x, budget);
        RunOutcome ob = run(b, x, budget);
        ++rep.inputs_checked;
        if (oa.status == RunStatus::BudgetExceeded || ob.status == RunStatus::BudgetExceeded) {
            rep.incomparable.push_back(x);
            continue;
        }
        bool same = oa.status == ob.status &&
                    (oa.status != RunStatus::Halted || oa.output == ob.output);
        if (!same) {
            rep.counterexample = x;
            rep.lhs_at_counterexample = outcome_label(oa);
            rep.rhs_at_counterexample = outcome_label(ob);
            return rep;
        }
    }
    return rep;
}

EquivalenceReport equivalent_on(const Machine& a, const Machine& b, int max_len,
                                uint64_t budget) {
    return equivalent_on_inputs(a, b, all_inputs_up_to(max_len), budget);
}

std::vector<std::string> sample_inputs(Rng& rng, int min_len, int max_len, int count) {
    if (min_len < 0 || max_len < min_len) throw ArgError("invalid sample length bounds");
    std::vector<std::string> out;
    out.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        int len = min_len + static_cast<int>(rng.below(
                                static_cast<uint64_t>(max_len - min_len + 1)));
        std::string s(static_cast<size_t>(len), '0');
        for (int j = 0; j < len; ++j)
            s[static_cast<size_t>(j)] = rng.boolean() ? '1' : '0';
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace tmark
