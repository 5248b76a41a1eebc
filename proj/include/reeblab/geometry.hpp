#ifndef REEBLAB_GEOMETRY_HPP
#define REEBLAB_GEOMETRY_HPP

#include <Eigen/Dense>

#include "reeblab/numerics.hpp"

namespace reeblab {

// Split coordinates on C^n = C x C^{n-1}: (x1,y1) the fast plane, (x2,y2)
// the transverse block, x2,y2 in R^{n-1}.
struct SplitPoint {
    double x1 = 0.0;
    double y1 = 0.0;
    Eigen::VectorXd x2;
    Eigen::VectorXd y2;

    SplitPoint() = default;
    SplitPoint(double x1_, double y1_, Eigen::VectorXd x2_, Eigen::VectorXd y2_);
    static SplitPoint zero(int n);

    int dim() const { return 1 + static_cast<int>(x2.size()); }

    SplitPoint operator+(const SplitPoint& o) const;
    SplitPoint operator-(const SplitPoint& o) const;
    SplitPoint operator*(double c) const;
    double norm() const;
};

// Tangent vectors share the value layout of points; every space in scope is
// a coordinate patch.
using TangentVec = SplitPoint;

// omega_st = dx ^ dy, evaluated on a pair of tangent vectors.
double eval_symplectic(const TangentVec& u, const TangentVec& v);

// alpha = 2 x.dy + y.dx at a base point.
double eval_alpha(const SplitPoint& point, const TangentVec& v);

// Same, with the quadratic form accumulated in double-double.  Used where the
// fast-plane magnitudes destroy cancellation in plain doubles.
DD eval_alpha_dd(const SplitPoint& point, const TangentVec& v);

// Liouville field v = 2x.dx-part - y.dy-part as a tangent vector.
TangentVec liouville_field(const SplitPoint& point);

// Tangent data on the 1-jet space J^1(S^{n-1}) = {q^2=1, p.q=0} x R_z.
struct JetPoint {
    Eigen::VectorXd q;
    Eigen::VectorXd p;
    double z = 0.0;
};
struct JetTangent {
    Eigen::VectorXd dq;
    Eigen::VectorXd dp;
    double dz = 0.0;
};

// alpha_st = dz - p.dq on J^1(S^{n-1}).  Rejects base points violating the
// sphere/orthogonality constraints beyond 1e-12.
double eval_alpha_jet(const JetPoint& base, const JetTangent& v);

}  // namespace reeblab

#endif
