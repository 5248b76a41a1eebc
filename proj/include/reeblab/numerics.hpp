#ifndef REEBLAB_NUMERICS_HPP
#define REEBLAB_NUMERICS_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace reeblab {

// Error-free transforms (Knuth two-sum, FMA two-prod) and a small
// double-double type.  Needed because the defining quadric mixes magnitudes
// epsilon^{2s+2-2p} against a right hand side of order 1 (rescaled units),
// which plain doubles cannot cancel to the tolerances the contracts ask for.
struct DD {
    double hi = 0.0;
    double lo = 0.0;

    DD() = default;
    DD(double h) : hi(h), lo(0.0) {}
    DD(double h, double l) : hi(h), lo(l) {}

    static DD two_sum(double a, double b) {
        double s = a + b;
        double bb = s - a;
        double err = (a - (s - bb)) + (b - bb);
        return DD(s, err);
    }
    static DD two_prod(double a, double b) {
        double p = a * b;
        double err = std::fma(a, b, -p);
        return DD(p, err);
    }

    DD operator+(const DD& o) const {
        DD s = two_sum(hi, o.hi);
        double lo_sum = s.lo + lo + o.lo;
        DD r = two_sum(s.hi, lo_sum);
        return r;
    }
    DD operator-(const DD& o) const { return *this + DD(-o.hi, -o.lo); }
    DD operator*(const DD& o) const {
        DD p = two_prod(hi, o.hi);
        p.lo += hi * o.lo + lo * o.hi;
        DD r = two_sum(p.hi, p.lo);
        return r;
    }
    DD operator*(double d) const { return *this * DD(d); }
    DD& operator+=(const DD& o) { *this = *this + o; return *this; }
    DD& operator-=(const DD& o) { *this = *this - o; return *this; }

    double value() const { return hi + lo; }
};

inline DD dd_sq(double a) { return DD::two_prod(a, a); }

// Compensated (Neumaier) running sum for plain-double accumulation.
struct KahanSum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

// log(e^{2T}) solved in the shifted variable u = e^{2T}-1, see flows.
inline double log1p_half(double u) { return 0.5 * std::log1p(u); }

// Deterministic PRNG (splitmix64 core).  Standard-library distributions are
// implementation defined, so all sampling goes through this.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    // uniform in [0,1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    // Box-Muller, fixed algorithm for reproducibility
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double th = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

struct ContractViolation : std::runtime_error {
    explicit ContractViolation(const std::string& what) : std::runtime_error(what) {}
};

struct NoConvergence : std::runtime_error {
    double best_residual;
    NoConvergence(const std::string& what, double res)
        : std::runtime_error(what), best_residual(res) {}
};

}  // namespace reeblab

#endif
