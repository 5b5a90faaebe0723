#pragma once

#include <stdexcept>
#include <string>

namespace qstate {

// Invalid input: out-of-range parameters, mismatched meshes, bad tree points.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A field evaluator produced a non-finite value.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, int vertex)
      : std::runtime_error(what), vertex_(vertex) {}
  int vertex() const { return vertex_; }

 private:
  int vertex_;
};

// Malformed mesh: degenerate triangles, broken invariants on import.
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The mesh is not a closed genus-0 surface.
class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Point location on the sphere failed.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Energy drift along a trajectory exceeded its budget.
class IntegratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A partition of unity could not satisfy its certificates.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qstate
