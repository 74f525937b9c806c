#include "nlbox/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nlbox {

namespace {

using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

RawBoxTable raw_box_from_json(const json& j) {
  RawBoxTable raw;
  raw.x_card = j.at("x_card").get<int>();
  raw.y_card = j.at("y_card").get<int>();
  raw.a_card = j.at("a_card").get<int>();
  raw.b_card = j.at("b_card").get<int>();
  if (raw.x_card < 1 || raw.y_card < 1 || raw.a_card < 1 || raw.b_card < 1)
    throw std::runtime_error("box file: cardinalities must be positive");
  const auto& p = j.at("p");
  if (static_cast<int>(p.size()) != raw.x_card)
    throw std::runtime_error("box file: p has wrong x extent");
  raw.conditionals.assign(raw.x_card * raw.y_card, Eigen::MatrixXd(raw.a_card, raw.b_card));
  for (int x = 0; x < raw.x_card; ++x) {
    if (static_cast<int>(p[x].size()) != raw.y_card)
      throw std::runtime_error("box file: p has wrong y extent");
    for (int y = 0; y < raw.y_card; ++y) {
      if (static_cast<int>(p[x][y].size()) != raw.a_card)
        throw std::runtime_error("box file: p has wrong a extent");
      for (int a = 0; a < raw.a_card; ++a) {
        if (static_cast<int>(p[x][y][a].size()) != raw.b_card)
          throw std::runtime_error("box file: p has wrong b extent");
        for (int b = 0; b < raw.b_card; ++b)
          raw.conditionals[x * raw.y_card + y](a, b) = p[x][y][a][b].get<double>();
      }
    }
  }
  return raw;
}

NoSignalingBox box_from_json(const json& j, double tolerance) {
  RawBoxTable raw = raw_box_from_json(j);
  return NoSignalingBox(raw.x_card, raw.y_card, raw.a_card, raw.b_card,
                        std::move(raw.conditionals), tolerance);
}

json box_to_json(const NoSignalingBox& box) {
  json j;
  j["x_card"] = box.x_card();
  j["y_card"] = box.y_card();
  j["a_card"] = box.a_card();
  j["b_card"] = box.b_card();
  json p = json::array();
  for (int x = 0; x < box.x_card(); ++x) {
    json px = json::array();
    for (int y = 0; y < box.y_card(); ++y) {
      json pxy = json::array();
      for (int a = 0; a < box.a_card(); ++a) {
        json pa = json::array();
        for (int b = 0; b < box.b_card(); ++b) pa.push_back(box.prob(x, y, a, b));
        pxy.push_back(std::move(pa));
      }
      px.push_back(std::move(pxy));
    }
    p.push_back(std::move(px));
  }
  j["p"] = std::move(p);
  return j;
}

}  // namespace

RawBoxTable load_raw_box_table(const std::string& path) {
  return raw_box_from_json(read_json_file(path));
}

NoSignalingBox box_from_json_text(const std::string& text, double tolerance) {
  return box_from_json(json::parse(text), tolerance);
}

std::string box_to_json_text(const NoSignalingBox& box) { return box_to_json(box).dump(2); }

NoSignalingBox load_box(const std::string& path, double tolerance) {
  return box_from_json(read_json_file(path), tolerance);
}

void save_box(const NoSignalingBox& box, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << box_to_json_text(box) << "\n";
}

std::string history_key(const History& h) {
  std::ostringstream os;
  os << h.external;
  for (const auto& [box, input, output] : h.used)
    os << ";" << box << "," << input << "," << output;
  return os.str();
}

namespace {

std::vector<int> split_ints(const std::string& part, char sep) {
  std::vector<int> out;
  std::istringstream is(part);
  std::string tok;
  while (std::getline(is, tok, sep)) out.push_back(std::stoi(tok));
  return out;
}

std::vector<std::array<int, 3>> parse_triples(const std::string& key, int& external) {
  std::istringstream is(key);
  std::string part;
  std::vector<std::array<int, 3>> triples;
  bool first = true;
  while (std::getline(is, part, ';')) {
    if (first) {
      external = std::stoi(part);
      first = false;
      continue;
    }
    const std::vector<int> v = split_ints(part, ',');
    if (v.size() != 3) throw std::runtime_error("bad key segment '" + part + "'");
    triples.push_back({v[0], v[1], v[2]});
  }
  if (first) throw std::runtime_error("empty key");
  return triples;
}

}  // namespace

History parse_history_key(const std::string& key) {
  History h;
  h.used = parse_triples(key, h.external);
  return h;
}

std::string view_key(const PartyView& v) {
  std::ostringstream os;
  os << v.external;
  for (const auto& [pos, input, output] : v.per_box)
    os << ";" << pos << "," << input << "," << output;
  return os.str();
}

PartyView parse_view_key(const std::string& key, int n) {
  PartyView v;
  v.per_box = parse_triples(key, v.external);
  if (static_cast<int>(v.per_box.size()) != n)
    throw std::runtime_error("view key must list every box: '" + key + "'");
  return v;
}

namespace {

PartyStrategy strategy_from_json(const json& j, Side side, const std::vector<NoSignalingBox>& boxes,
                                 int external_card) {
  const int n = static_cast<int>(boxes.size());
  std::vector<int> inputs, outputs;
  for (const auto& b : boxes) {
    inputs.push_back(side == Side::Alice ? b.x_card() : b.y_card());
    outputs.push_back(side == Side::Alice ? b.a_card() : b.b_card());
  }
  const int final_card = j.at("final_card").get<int>();
  PartyStrategy s(side, inputs, outputs, external_card, final_card);

  const auto& steps = j.at("steps");
  if (static_cast<int>(steps.size()) != n)
    throw std::runtime_error("wiring spec: need one step object per box");
  for (int step = 0; step < n; ++step) {
    const auto& obj = steps[step];
    if (obj.contains("rules")) {
      for (const auto& [key, row] : obj.at("rules").items()) {
        const History h = parse_history_key(key);
        if (static_cast<int>(h.used.size()) != step)
          throw std::runtime_error("wiring spec: history '" + key + "' does not match step " +
                                   std::to_string(step));
        Eigen::VectorXd r(s.pair_count());
        if (static_cast<int>(row.size()) != s.pair_count())
          throw std::runtime_error("wiring spec: rule row length mismatch at '" + key + "'");
        for (int k = 0; k < s.pair_count(); ++k) r(k) = row[k].get<double>();
        s.set_step_rule(h, std::move(r));
      }
    }
    if (obj.contains("map")) {
      for (const auto& [key, target] : obj.at("map").items()) {
        const History h = parse_history_key(key);
        if (static_cast<int>(h.used.size()) != step)
          throw std::runtime_error("wiring spec: history '" + key + "' does not match step " +
                                   std::to_string(step));
        s.set_deterministic_step(h, target[0].get<int>(), target[1].get<int>());
      }
    }
  }

  const auto& out = j.at("output");
  if (out.contains("select_output_of_box")) {
    s.set_output_passthrough(out.at("select_output_of_box").get<int>());
  } else if (out.contains("rules")) {
    for (const auto& [key, row] : out.at("rules").items()) {
      const PartyView v = parse_view_key(key, n);
      Eigen::VectorXd r(final_card);
      for (int k = 0; k < final_card; ++k) r(k) = row[k].get<double>();
      s.set_output_rule(v, std::move(r));
    }
  } else if (out.contains("map")) {
    for (const auto& [key, value] : out.at("map").items())
      s.set_deterministic_output(parse_view_key(key, n), value.get<int>());
  } else {
    throw std::runtime_error("wiring spec: output needs rules, map or select_output_of_box");
  }
  return s;
}

}  // namespace

WiringInstance load_wiring(const std::string& path, double tolerance) {
  const json j = read_json_file(path);
  const auto dir = std::filesystem::path(path).parent_path();

  std::vector<NoSignalingBox> boxes;
  for (const auto& bj : j.at("boxes")) {
    if (bj.contains("file")) {
      std::filesystem::path p(bj.at("file").get<std::string>());
      if (p.is_relative()) p = dir / p;
      boxes.push_back(load_box(p.string(), tolerance));
    } else {
      boxes.push_back(box_from_json(bj, tolerance));
    }
  }
  const int xc = j.at("x_prime_card").get<int>();
  const int yc = j.at("y_prime_card").get<int>();
  WiringInstance instance{boxes, strategy_from_json(j.at("alice"), Side::Alice, boxes, xc),
                          strategy_from_json(j.at("bob"), Side::Bob, boxes, yc)};
  check_instance(instance);
  return instance;
}

}  // namespace nlbox
