#pragma once

#include <string>
#include <vector>

namespace peaks::tables {

// Reproduction of the worked example's three published tables, grid over
// p in {30, 9, 3} x mu in {1/3, 1/10, 1/1000}. The published integers are
// the expected values: every cell is recomputed, and any disagreement is
// emitted with a discrepancy marker and the recomputed value, never
// silently corrected.
struct Discrepancy {
  std::string row;
  std::string column;
  std::string printed;
  std::string recomputed;
};

struct TableDocument {
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> notes;
  std::vector<Discrepancy> discrepancies;

  std::string to_text() const;
  std::string to_csv() const;
};

// which = 1, 2 or 3.
TableDocument reproduce_table(int which);

}  // namespace peaks::tables
