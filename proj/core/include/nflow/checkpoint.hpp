#pragma once

#include <string>

#include "nflow/field.hpp"

namespace nflow {

// Binary state file. Layout (little endian):
//   8 bytes  magic "NFLW0001"
//   u8       domain kind (0 torus, 1 sphere2)
//   u8       domain dimension n
//   u8       ambient components L
//   f64      torus extent (1.0 for sphere)
//   n x u32  per-axis resolution
//   f64      time
//   N*L f64  node values, row-major, node-major
// A JSON sidecar `<path>.json` carries the run parameters.
void write_checkpoint(const std::string& path, const MapField& u, const DomainSpec& domain,
                      double time, const std::string& params_json);

struct Checkpoint {
  MapField u;
  DomainSpec domain;
  double time = 0.0;
  std::string params_json;
};

Checkpoint read_checkpoint(const std::string& path);

}  // namespace nflow
