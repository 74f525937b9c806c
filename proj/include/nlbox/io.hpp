#pragma once

#include <string>

#include "nlbox/box.hpp"
#include "nlbox/wiring.hpp"

namespace nlbox {

// Box file: {"x_card":int,"y_card":int,"a_card":int,"b_card":int,
//            "p":[[[[real]]]]} with index order p[x][y][a][b].
struct RawBoxTable {
  int x_card = 0, y_card = 0, a_card = 0, b_card = 0;
  std::vector<Eigen::MatrixXd> conditionals;
};

// Parses without validating, so callers can report violations themselves.
RawBoxTable load_raw_box_table(const std::string& path);

NoSignalingBox box_from_json_text(const std::string& text, double tolerance = kNsTolerance);
std::string box_to_json_text(const NoSignalingBox& box);
NoSignalingBox load_box(const std::string& path, double tolerance = kNsTolerance);
void save_box(const NoSignalingBox& box, const std::string& path);

// Wiring spec: {"boxes":[box object or {"file": path}], "x_prime_card":int,
// "y_prime_card":int, "alice":{...}, "bob":{...}}. Each party carries
// "final_card", "steps" (one object per step with "rules" {history: row} or
// the compact deterministic "map" {history: [box, input]}), and "output"
// ({"rules"}, {"map": {view: value}}, or {"select_output_of_box": i}).
// History keys are "x'" followed by ";box,input,output" per used box, in the
// order they were used; view keys are "x'" followed by ";position,input,output"
// for every box in box order. All indices 0-based.
WiringInstance load_wiring(const std::string& path, double tolerance = kNsTolerance);

std::string history_key(const History& h);
History parse_history_key(const std::string& key);
std::string view_key(const PartyView& v);
PartyView parse_view_key(const std::string& key, int n);

}  // namespace nlbox
