#pragma once

#include <string>
#include <vector>

namespace s3flow {

struct VerifyItem {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string measured;  // one line of headline numbers
  std::string detail;    // optional table
  std::string blocker;   // set when the only failure is a documented resolution limit
  double seconds = 0.0;
};

struct VerifyOptions {
  std::vector<std::string> only;  // empty: everything
  bool inject_fault = false;      // perturbs one boundary multiplier
};

/// spectrum, conservation, descent, convergence, bubbles, kazdan_warner,
/// ache_chang, b_vector, morse, concentration.
const std::vector<std::string>& verify_item_names();

/// Throws UsageError for an unknown name.
VerifyItem run_verify_item(const std::string& name, const VerifyOptions& opt = {});

std::vector<VerifyItem> verify_suite(const VerifyOptions& opt = {});

std::string verdict_line(const VerifyItem& item);
/// Verdict line followed by the indented detail table.
std::string format_item(const VerifyItem& item);
std::string verdict_table(const std::vector<VerifyItem>& items);

}  // namespace s3flow
