// Copyright 2026 The CQKA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <json.hpp>

#include "cqka/protocol.hpp"

namespace cqka {

namespace {

nlohmann::ordered_json decoys_json(std::span<const DecoySpec> specs) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto &d : specs) {
        arr.push_back({{"position", d.position}, {"basis", name_of(d.basis)}, {"bit", int(d.bit)}});
    }
    return arr;
}

std::string outcomes(std::span<const TwoBit> rs) {
    std::string s;
    for (std::size_t i = 0; i < rs.size(); i++) {
        if (i) {
            s.push_back(' ');
        }
        s += rs[i].str();
    }
    return s;
}

}  // namespace

std::string transcript_to_json(const SessionTranscript &t) {
    nlohmann::ordered_json j;
    j["protocol"] = t.protocol;
    j["n"] = t.n;
    j["p"] = t.p;
    j["tolerance"] = t.tolerance;
    j["aborted"] = t.aborted;
    j["abort_reason"] = t.abort_reason;
    j["decoy_error_rate"] = t.decoy_error_rate;
    auto states = nlohmann::ordered_json::array();
    for (auto b : t.charlie_states) {
        states.push_back(name_of(b));
    }
    j["charlie_states"] = states;
    j["k_c"] = bits_to_string(t.k_c);
    j["k_a"] = bits_to_string(t.k_a);
    j["bob_prepared"] = bits_to_string(t.bob_prepared);
    j["k_b"] = bits_to_string(t.k_b);
    j["r_a"] = outcomes(t.r_a);
    j["r_b"] = outcomes(t.r_b);
    j["decoys_first"] = decoys_json(t.decoys_first);
    j["decoys_second"] = decoys_json(t.decoys_second);
    auto ann = nlohmann::ordered_json::array();
    for (const auto &a : t.board.entries()) {
        ann.push_back({{"who", name_of(a.who)}, {"round", a.round}, {"bits", bits_to_string(a.bits)}});
    }
    j["announcements"] = ann;
    j["spot_check_positions"] = t.spot_check_positions;
    j["spot_check_mismatch"] = t.spot_check_mismatch;
    j["final_key_alice"] = bits_to_string(t.final_key_alice);
    j["final_key_bob"] = bits_to_string(t.final_key_bob);
    return j.dump();
}

}  // namespace cqka
