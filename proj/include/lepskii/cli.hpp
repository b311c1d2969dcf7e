#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lepskii/experiments.hpp"

namespace lepskii {

/// Runs one command line (without the program name). Returns 0 on success,
/// 1 on a domain error and 2 on a usage error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct EffdimRow {
  double lambda = 0.0;
  double N_model = 0.0;
  double N_emp = 0.0;
  double delta = 0.0;
  std::optional<bool> factor5_holds;  // empty when delta > 1
};

/// Effective-dimension table on a geometric grid for one sampled design.
/// lambda0 <= 0 selects the heuristic start.
std::vector<EffdimRow> effdim_table(const SyntheticModel& model, long n, std::uint64_t seed,
                                    double q, double lambda0, double eta);

void write_effdim_csv(std::ostream& out, const std::vector<EffdimRow>& rows);
std::vector<EffdimRow> read_effdim_csv(std::istream& in);

}  // namespace lepskii
