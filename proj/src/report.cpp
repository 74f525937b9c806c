#include "nlbox/report.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nlbox {

std::string format_double(double value) {
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

bool FuzzReport::passed() const {
  return std::all_of(cases.begin(), cases.end(), [](const FuzzCase& c) { return c.pass; });
}

std::vector<FuzzCase> FuzzReport::failures() const {
  std::vector<FuzzCase> out;
  for (const auto& c : cases)
    if (!c.pass) out.push_back(c);
  return out;
}

void FuzzReport::add(FuzzCase c) {
  worst_margin = cases.empty() ? c.margin : std::max(worst_margin, c.margin);
  ++cases_run;
  cases.push_back(std::move(c));
}

std::string fuzz_report_csv(const FuzzReport& report) {
  std::ostringstream os;
  os << "case_id,seed,quantity,lhs,rhs,margin,pass\n";
  for (const auto& c : report.cases)
    os << c.case_id << "," << c.seed << "," << c.quantity << "," << format_double(c.lhs) << ","
       << format_double(c.rhs) << "," << format_double(c.margin) << ","
       << (c.pass ? "true" : "false") << "\n";
  return os.str();
}

std::string fuzz_report_summary(const FuzzReport& report) {
  nlohmann::json j;
  j["campaign"] = report.campaign;
  j["config"] = nlohmann::json::parse(report.config_json.empty() ? "{}" : report.config_json);
  j["cases_run"] = report.cases_run;
  j["worst_margin"] = report.worst_margin;
  j["passed"] = report.passed();
  nlohmann::json fails = nlohmann::json::array();
  for (const auto& c : report.failures()) {
    nlohmann::json f;
    f["case_id"] = c.case_id;
    f["seed"] = c.seed;
    f["quantity"] = c.quantity;
    f["lhs"] = c.lhs;
    f["rhs"] = c.rhs;
    f["margin"] = c.margin;
    fails.push_back(std::move(f));
  }
  j["failures"] = std::move(fails);
  return j.dump(2);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace nlbox
