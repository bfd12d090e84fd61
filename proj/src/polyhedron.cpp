#include "agc/polyhedron.hpp"

#include <cmath>
#include <cstdint>
#include <sstream>

namespace agc {

namespace {

constexpr double kZeroTol = 1e-9;

struct Gen {
    Vector u;              // homogeneous coordinates (x, t)
    std::uint32_t active;  // bitmask over processed constraint rows
};

void normalize(Vector& u) {
    double n = u.cwiseAbs().maxCoeff();
    if (n > 0.0) u /= n;
}

// Combinatorial adjacency: p and q span an edge iff no other generator's
// active set contains the intersection of theirs.
bool adjacent(const std::vector<Gen>& gens, size_t pi, size_t qi) {
    std::uint32_t common = gens[pi].active & gens[qi].active;
    for (size_t s = 0; s < gens.size(); ++s) {
        if (s == pi || s == qi) continue;
        if ((gens[s].active & common) == common) return false;
    }
    return true;
}

bool nearly_equal(const Vector& a, const Vector& b) {
    return (a - b).cwiseAbs().maxCoeff() < 1e-7;
}

}  // namespace

VRep enumerate_v_rep(const Matrix& constraints, const Vector& rhs) {
    const int n = static_cast<int>(constraints.cols());
    const int m = static_cast<int>(constraints.rows());
    if (rhs.size() != m) {
        throw DimensionError("enumerate_v_rep: rhs length does not match row count");
    }
    if (n > kMaxEnumerationDim) {
        std::ostringstream msg;
        msg << "enumerate_v_rep: dimension " << n << " exceeds limit " << kMaxEnumerationDim;
        throw CapabilityError(msg.str());
    }
    if (m > kMaxEnumerationRows) {
        std::ostringstream msg;
        msg << "enumerate_v_rep: row count " << m << " exceeds limit " << kMaxEnumerationRows;
        throw CapabilityError(msg.str());
    }
    if (n == 0) {
        // Zero-dimensional space: the single (empty) point, unless some row
        // forbids it.
        VRep rep;
        if (m == 0 || rhs.minCoeff() >= 0.0) rep.vertices.push_back(Vector(0));
        return rep;
    }

    // Homogenization cone rows: [A, -b] and the slice row -t <= 0.
    Matrix cone(m + 1, n + 1);
    cone.setZero();
    cone.block(0, 0, m, n) = constraints;
    cone.block(0, n, m, 1) = -rhs;
    cone(m, n) = -1.0;

    std::vector<Vector> lineality;
    lineality.reserve(static_cast<size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        lineality.push_back(Vector::Unit(n + 1, i));
    }
    std::vector<Gen> gens;

    for (int k = 0; k <= m; ++k) {
        const Vector a = cone.row(k).transpose();
        const double tol = kZeroTol * (1.0 + a.cwiseAbs().maxCoeff());
        const std::uint32_t bit = std::uint32_t{1} << k;
        const std::uint32_t before = bit - 1;  // all previously processed rows

        // Pick the lineality direction with the largest component along a.
        int pivot = -1;
        double best = tol;
        for (size_t i = 0; i < lineality.size(); ++i) {
            double d = std::abs(a.dot(lineality[i]));
            if (d > best) {
                best = d;
                pivot = static_cast<int>(i);
            }
        }

        if (pivot >= 0) {
            Vector l0 = lineality[pivot];
            double d0 = a.dot(l0);
            lineality.erase(lineality.begin() + pivot);
            for (Vector& l : lineality) {
                l -= (a.dot(l) / d0) * l0;
                normalize(l);
            }
            for (Gen& g : gens) {
                g.u -= (a.dot(g.u) / d0) * l0;
                normalize(g.u);
                g.active |= bit;
            }
            Gen fresh;
            fresh.u = d0 > 0.0 ? Vector(-l0) : l0;
            normalize(fresh.u);
            fresh.active = before;  // interior to this row, on all earlier ones
            gens.push_back(std::move(fresh));
            continue;
        }

        std::vector<size_t> pos, neg;
        for (size_t i = 0; i < gens.size(); ++i) {
            double d = a.dot(gens[i].u);
            if (d > tol) {
                pos.push_back(i);
            } else if (d < -tol) {
                neg.push_back(i);
            } else {
                gens[i].active |= bit;
            }
        }
        if (pos.empty()) continue;

        std::vector<Gen> next;
        next.reserve(gens.size() + pos.size() * neg.size());
        for (size_t i = 0; i < gens.size(); ++i) {
            bool drop = false;
            for (size_t p : pos) {
                if (p == i) {
                    drop = true;
                    break;
                }
            }
            if (!drop) next.push_back(gens[i]);
        }
        for (size_t p : pos) {
            for (size_t q : neg) {
                if (!adjacent(gens, p, q)) continue;
                double dp = a.dot(gens[p].u);
                double dq = a.dot(gens[q].u);
                Gen w;
                w.u = dp * gens[q].u - dq * gens[p].u;
                normalize(w.u);
                w.active = (gens[p].active & gens[q].active) | bit;
                next.push_back(std::move(w));
            }
        }
        gens = std::move(next);
    }

    VRep rep;
    for (const Gen& g : gens) {
        double t = g.u[n];
        if (t > kZeroTol) {
            Vector v = g.u.head(n) / t;
            bool dup = false;
            for (const Vector& seen : rep.vertices) dup = dup || nearly_equal(seen, v);
            if (!dup) rep.vertices.push_back(std::move(v));
        } else {
            Vector r = g.u.head(n);
            normalize(r);
            if (r.cwiseAbs().maxCoeff() < kZeroTol) continue;
            bool dup = false;
            for (const Vector& seen : rep.rays) dup = dup || nearly_equal(seen, r);
            if (!dup) rep.rays.push_back(std::move(r));
        }
    }
    // A nonempty polyhedron always yields at least one t > 0 generator.
    if (rep.vertices.empty()) return VRep{};

    for (const Vector& l : lineality) {
        Vector r = l.head(n);
        normalize(r);
        for (int sign : {+1, -1}) {
            Vector cand = sign * r;
            bool dup = false;
            for (const Vector& seen : rep.rays) dup = dup || nearly_equal(seen, cand);
            if (!dup) rep.rays.push_back(std::move(cand));
        }
    }
    return rep;
}

SupportValue vrep_max(const VRep& rep, const Vector& objective) {
    SupportValue out;
    if (rep.empty()) return out;
    const double obj_scale = objective.size() > 0 ? objective.cwiseAbs().maxCoeff() : 0.0;
    const double dir_tol = kZeroTol * (1.0 + obj_scale);
    for (const Vector& r : rep.rays) {
        if (objective.dot(r) > dir_tol) {
            out.kind = SupportKind::Unbounded;
            return out;
        }
    }
    out.kind = SupportKind::Finite;
    out.value = -std::numeric_limits<double>::infinity();
    for (const Vector& v : rep.vertices) {
        out.value = std::max(out.value, objective.dot(v));
    }
    return out;
}

}  // namespace agc
