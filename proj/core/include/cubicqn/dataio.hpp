#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "cubicqn/oracle.hpp"

namespace cubicqn {

struct SparseEntry {
  int index;  // 1-based, strictly increasing within a row
  double value;
};

struct RawDataset {
  std::vector<std::vector<SparseEntry>> rows;
  std::vector<double> labels;  // already mapped to +-1
  int dim = 0;                 // max index seen
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line_number, const std::string& message)
      : std::runtime_error("line " + std::to_string(line_number) + ": " + message),
        line(line_number) {}
  int line;
};

/// LIBSVM text format: one example per line, label then index:value tokens,
/// '#' starts a comment, blank lines skipped. Labels are mapped to {-1,+1} by
/// sign; a 0 label is rejected unless remap01 is set, which reads {0,1}-style
/// labels (0 -> -1). Malformed input throws ParseError with the line number.
RawDataset parse_libsvm(std::istream& in, bool remap01 = false);

void write_libsvm(const RawDataset& data, std::ostream& out);

/// Reads a LIBSVM file; paths ending in ".gz" are inflated first.
RawDataset load_libsvm_file(const std::string& path, bool remap01 = false);

Dataset to_dense(const RawDataset& raw, std::string source = {});

struct NormalizeOutcome {
  Dataset dataset;
  int dropped_rows = 0;  // all-zero rows cannot be normalized
};

/// Scales every row to unit Euclidean norm, dropping all-zero rows.
NormalizeOutcome normalize_rows(const Dataset& input);

/// Synthetic logistic instance: normalized Gaussian rows, labels drawn from a
/// planted hyperplane with flip noise shrinking as `separation` grows
/// (separation = inf gives noiseless, linearly separable labels).
/// Deterministic per seed.
Dataset synth_logistic(int n, int d, std::uint64_t seed, double separation);

}  // namespace cubicqn
