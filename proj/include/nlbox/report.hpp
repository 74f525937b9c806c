#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nlbox {

// Locale-independent decimal formatting with 12 significant digits ('.'
// separator always).
std::string format_double(double value);

// One evaluated assertion of a fuzz campaign: pass means lhs <= rhs up to the
// campaign's tolerance, margin = lhs - rhs.
struct FuzzCase {
  int case_id = 0;
  std::uint64_t seed = 0;
  std::string quantity;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool pass = true;
};

struct FuzzReport {
  std::string campaign;
  std::string config_json;  // exact configuration for re-running
  std::vector<FuzzCase> cases;
  int cases_run = 0;
  double worst_margin = 0.0;

  bool passed() const;
  std::vector<FuzzCase> failures() const;
  void add(FuzzCase c);
};

// CSV schema: case_id,seed,quantity,lhs,rhs,margin,pass
std::string fuzz_report_csv(const FuzzReport& report);
// JSON summary with the config echo and the failure list.
std::string fuzz_report_summary(const FuzzReport& report);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace nlbox
