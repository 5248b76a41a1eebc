#include "reeblab/geometry.hpp"

#include <cmath>

namespace reeblab {

SplitPoint::SplitPoint(double x1_, double y1_, Eigen::VectorXd x2_, Eigen::VectorXd y2_)
    : x1(x1_), y1(y1_), x2(std::move(x2_)), y2(std::move(y2_)) {
    if (x2.size() != y2.size())
        throw ContractViolation("SplitPoint: x2 and y2 must have equal length");
    if (dim() < 2)
        throw ContractViolation("SplitPoint: dimension must be at least 2");
}

SplitPoint SplitPoint::zero(int n) {
    if (n < 2) throw ContractViolation("SplitPoint::zero: n >= 2 required");
    return SplitPoint(0.0, 0.0, Eigen::VectorXd::Zero(n - 1), Eigen::VectorXd::Zero(n - 1));
}

SplitPoint SplitPoint::operator+(const SplitPoint& o) const {
    return SplitPoint(x1 + o.x1, y1 + o.y1, x2 + o.x2, y2 + o.y2);
}
SplitPoint SplitPoint::operator-(const SplitPoint& o) const {
    return SplitPoint(x1 - o.x1, y1 - o.y1, x2 - o.x2, y2 - o.y2);
}
SplitPoint SplitPoint::operator*(double c) const {
    return SplitPoint(c * x1, c * y1, c * x2, c * y2);
}
double SplitPoint::norm() const {
    return std::sqrt(x1 * x1 + y1 * y1 + x2.squaredNorm() + y2.squaredNorm());
}

static void check_same_dim(const SplitPoint& a, const SplitPoint& b, const char* who) {
    if (a.x2.size() != b.x2.size())
        throw ContractViolation(std::string(who) + ": dimension mismatch");
}

double eval_symplectic(const TangentVec& u, const TangentVec& v) {
    check_same_dim(u, v, "eval_symplectic");
    return u.x1 * v.y1 - u.y1 * v.x1 + u.x2.dot(v.y2) - u.y2.dot(v.x2);
}

double eval_alpha(const SplitPoint& point, const TangentVec& v) {
    check_same_dim(point, v, "eval_alpha");
    return 2.0 * (point.x1 * v.y1 + point.x2.dot(v.y2)) + point.y1 * v.x1 + point.y2.dot(v.x2);
}

DD eval_alpha_dd(const SplitPoint& point, const TangentVec& v) {
    check_same_dim(point, v, "eval_alpha");
    DD acc = DD::two_prod(2.0 * point.x1, v.y1);
    acc += DD::two_prod(point.y1, v.x1);
    for (Eigen::Index j = 0; j < point.x2.size(); ++j) {
        acc += DD::two_prod(2.0 * point.x2[j], v.y2[j]);
        acc += DD::two_prod(point.y2[j], v.x2[j]);
    }
    return acc;
}

TangentVec liouville_field(const SplitPoint& point) {
    return TangentVec(2.0 * point.x1, -point.y1, 2.0 * point.x2, -point.y2);
}

double eval_alpha_jet(const JetPoint& base, const JetTangent& v) {
    if (base.q.size() != base.p.size() || base.q.size() != v.dq.size() ||
        v.dq.size() != v.dp.size())
        throw ContractViolation("eval_alpha_jet: dimension mismatch");
    const double tol = 1e-12;
    if (std::abs(base.q.squaredNorm() - 1.0) > tol)
        throw ContractViolation("eval_alpha_jet: |q| != 1 beyond tolerance (invalid jet point)");
    if (std::abs(base.p.dot(base.q)) > tol)
        throw ContractViolation("eval_alpha_jet: p.q != 0 beyond tolerance (invalid jet point)");
    return v.dz - base.p.dot(v.dq);
}

}  // namespace reeblab
