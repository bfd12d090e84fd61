#pragma once

// Exact V-representation of small polyhedra P = {x : A x <= b} by the double
// description method on the homogenization cone {(x,t) : A x - b t <= 0, t >= 0}.
//
// Output semantics: P = conv(vertices) + cone(rays). A lineality direction is
// reported as a pair of opposite rays. Empty vertex and ray lists iff P is
// empty. Hard caps keep the worst case bounded: dimension <= 8, rows <= 24.

#include <vector>

#include "agc/lp.hpp"

namespace agc {

struct VRep {
    std::vector<Vector> vertices;
    std::vector<Vector> rays;

    bool empty() const { return vertices.empty() && rays.empty(); }
};

inline constexpr int kMaxEnumerationDim = 8;
inline constexpr int kMaxEnumerationRows = 24;

/// Enumerates all vertices and extreme rays of {x : A x <= b}.
/// Throws CapabilityError beyond the documented dimension/row limits.
VRep enumerate_v_rep(const Matrix& constraints, const Vector& rhs);

enum class SupportKind { Empty, Finite, Unbounded };

struct SupportValue {
    SupportKind kind = SupportKind::Empty;
    double value = 0.0;  // max of objective over the polyhedron (Finite only)
};

/// Maximum of a linear objective over a polyhedron given by its V-rep.
SupportValue vrep_max(const VRep& rep, const Vector& objective);

}  // namespace agc
