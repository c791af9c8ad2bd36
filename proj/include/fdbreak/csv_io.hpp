#ifndef FDBREAK_CSV_IO_HPP
#define FDBREAK_CSV_IO_HPP

#include <string>

#include "fdbreak/dataset.hpp"

namespace fdbreak {

struct IngestOptions {
  /// Min-max rescale x to [0,1] instead of rejecting out-of-range locations.
  bool rescale_x = false;
};

struct IngestResult {
  FunctionalDataset data;
  bool rescaled = false;
  double x_min = 0.0;  // affine map recorded when rescaled
  double x_max = 1.0;
};

/// Reads a long-format CSV with header `curve,x,y`. Curves are grouped by the
/// integer id and sorted by it (the id order is the time order). Malformed
/// rows raise IngestError with the 1-based line number.
IngestResult ingest_csv(const std::string& path, IngestOptions options = {});

/// Writes the dataset back in the same long format (bit-exact doubles, so a
/// written-and-reingested dataset reproduces pipeline results exactly).
void write_dataset_csv(const FunctionalDataset& data, const std::string& path);

}  // namespace fdbreak

#endif
