#pragma once

// Polynomial algebra over a finite family of independent standard Gaussian
// coordinates eta_1..eta_M, with the operators of Malliavin calculus realized
// exactly on polynomials: derivative D, divergence (Skorokhod integral) delta,
// number operator N = delta D, Wiener chaos decomposition, and expectation
// under the standard Gaussian measure. Coefficients are either exact
// rationals or doubles; every operation below is coefficient-exact, so in
// rational mode operator identities can be asserted with zero tolerance.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <sstream>
#include <vector>

#include "spdelab/errors.hpp"
#include "spdelab/rational.hpp"

namespace spdelab {

// Exponent multi-index, one entry per mode.
using ExponentVec = std::vector<std::uint32_t>;

// Degrees beyond this indicate a runaway computation, not a real use case.
inline constexpr int kMaxPolynomialDegree = 64;

template <class Coeff>
class GaussianPolynomial {
public:
    using coeff_type = Coeff;
    using TermMap = std::map<ExponentVec, Coeff>;

    GaussianPolynomial() = default;
    explicit GaussianPolynomial(int modes) : modes_(check_modes(modes)) {}

    static GaussianPolynomial constant(int modes, const Coeff& c) {
        GaussianPolynomial p(modes);
        p.add_term(ExponentVec(static_cast<std::size_t>(modes), 0u), c);
        return p;
    }

    // The coordinate function eta_k (0-based mode index).
    static GaussianPolynomial coordinate(int modes, int k) {
        GaussianPolynomial p(modes);
        if (k < 0 || k >= modes)
            throw ValidationError("coordinate index out of range");
        ExponentVec e(static_cast<std::size_t>(modes), 0u);
        e[static_cast<std::size_t>(k)] = 1u;
        p.add_term(e, CoeffTraits<Coeff>::from_int(1));
        return p;
    }

    int modes() const { return modes_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }
    const TermMap& terms() const { return terms_; }

    // Total degree; -1 for the zero polynomial.
    int total_degree() const {
        int d = -1;
        for (const auto& [e, c] : terms_) d = std::max(d, degree_of(e));
        return d;
    }

    void add_term(const ExponentVec& e, const Coeff& c) {
        if (static_cast<int>(e.size()) != modes_)
            throw ValidationError("exponent vector length does not match mode count");
        if (degree_of(e) > kMaxPolynomialDegree)
            throw CapacityError("polynomial degree cap exceeded");
        if (CoeffTraits<Coeff>::is_zero(c)) return;
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            terms_.emplace(e, c);
        } else {
            it->second += c;
            if (CoeffTraits<Coeff>::is_zero(it->second)) terms_.erase(it);
        }
    }

    Coeff coefficient(const ExponentVec& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? CoeffTraits<Coeff>::from_int(0) : it->second;
    }

    GaussianPolynomial& operator+=(const GaussianPolynomial& rhs) {
        require_same_modes(rhs);
        for (const auto& [e, c] : rhs.terms_) add_term(e, c);
        return *this;
    }
    GaussianPolynomial& operator-=(const GaussianPolynomial& rhs) {
        require_same_modes(rhs);
        for (const auto& [e, c] : rhs.terms_) add_term(e, -c);
        return *this;
    }
    friend GaussianPolynomial operator+(GaussianPolynomial a, const GaussianPolynomial& b) {
        a += b;
        return a;
    }
    friend GaussianPolynomial operator-(GaussianPolynomial a, const GaussianPolynomial& b) {
        a -= b;
        return a;
    }
    GaussianPolynomial operator-() const {
        GaussianPolynomial out(modes_);
        for (const auto& [e, c] : terms_) out.terms_.emplace(e, -c);
        return out;
    }

    GaussianPolynomial operator*(const GaussianPolynomial& rhs) const {
        require_same_modes(rhs);
        GaussianPolynomial out(modes_);
        ExponentVec e(static_cast<std::size_t>(modes_), 0u);
        for (const auto& [ea, ca] : terms_) {
            for (const auto& [eb, cb] : rhs.terms_) {
                for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
                out.add_term(e, ca * cb);
            }
        }
        return out;
    }

    GaussianPolynomial scaled(const Coeff& s) const {
        GaussianPolynomial out(modes_);
        if (CoeffTraits<Coeff>::is_zero(s)) return out;
        for (const auto& [e, c] : terms_) out.terms_.emplace(e, c * s);
        return out;
    }

    // Partial derivative in mode k (the k-th Malliavin component on
    // cylinder polynomials).
    GaussianPolynomial derivative(int k) const {
        if (k < 0 || k >= modes_) throw ValidationError("derivative index out of range");
        GaussianPolynomial out(modes_);
        const auto uk = static_cast<std::size_t>(k);
        for (const auto& [e, c] : terms_) {
            if (e[uk] == 0) continue;
            ExponentVec d = e;
            d[uk] -= 1;
            out.add_term(d, c * CoeffTraits<Coeff>::from_int(e[uk]));
        }
        return out;
    }

    Coeff eval(const std::vector<Coeff>& x) const {
        if (static_cast<int>(x.size()) != modes_)
            throw ValidationError("evaluation point length does not match mode count");
        Coeff acc = CoeffTraits<Coeff>::from_int(0);
        for (const auto& [e, c] : terms_) {
            Coeff t = c;
            for (std::size_t i = 0; i < e.size(); ++i)
                for (std::uint32_t p = 0; p < e[i]; ++p) t *= x[i];
            acc += t;
        }
        return acc;
    }

    bool operator==(const GaussianPolynomial& rhs) const {
        return modes_ == rhs.modes_ && terms_ == rhs.terms_;
    }

    // Deterministic rendering for reports and failure messages.
    std::string str() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [e, c] : terms_) {
            if (!first) os << " + ";
            first = false;
            os << "(" << c << ")";
            for (std::size_t i = 0; i < e.size(); ++i) {
                if (e[i] == 0) continue;
                os << "*eta" << (i + 1);
                if (e[i] > 1) os << "^" << e[i];
            }
        }
        return os.str();
    }

private:
    static int check_modes(int modes) {
        if (modes < 0) throw ValidationError("negative mode count");
        return modes;
    }
    static int degree_of(const ExponentVec& e) {
        long d = 0;
        for (auto v : e) d += v;
        return static_cast<int>(d);
    }
    void require_same_modes(const GaussianPolynomial& rhs) const {
        if (modes_ != rhs.modes_)
            throw ValidationError("mode counts differ between polynomial operands");
    }

    int modes_ = 0;
    TermMap terms_;
};

// A vector field with polynomial components, one per mode; the argument of
// the divergence operator.
template <class Coeff>
using PolyVector = std::vector<GaussianPolynomial<Coeff>>;

// E[eta^n] = (n-1)!! for even n, 0 for odd n.
template <class Coeff>
Coeff gaussian_moment(std::uint32_t n) {
    if (n % 2 != 0) return CoeffTraits<Coeff>::from_int(0);
    Coeff m = CoeffTraits<Coeff>::from_int(1);
    for (std::uint32_t i = n; i > 1; i -= 2) m *= CoeffTraits<Coeff>::from_int(i - 1);
    return m;
}

// Expectation under the standard Gaussian product measure. Exact: each
// monomial factorizes into independent one-dimensional moments.
template <class Coeff>
Coeff expectation(const GaussianPolynomial<Coeff>& p) {
    Coeff acc = CoeffTraits<Coeff>::from_int(0);
    for (const auto& [e, c] : p.terms()) {
        Coeff m = c;
        bool zero = false;
        for (auto v : e) {
            if (v % 2 != 0) {
                zero = true;
                break;
            }
            if (v > 0) m *= gaussian_moment<Coeff>(v);
        }
        if (!zero) acc += m;
    }
    return acc;
}

// L^2(gaussian) inner product E[P Q].
template <class Coeff>
Coeff inner_product(const GaussianPolynomial<Coeff>& p, const GaussianPolynomial<Coeff>& q) {
    return expectation(p * q);
}

// Full Malliavin derivative: component k is the partial derivative in eta_k.
template <class Coeff>
PolyVector<Coeff> malliavin(const GaussianPolynomial<Coeff>& p) {
    PolyVector<Coeff> out;
    out.reserve(static_cast<std::size_t>(p.modes()));
    for (int k = 0; k < p.modes(); ++k) out.push_back(p.derivative(k));
    return out;
}

// Divergence (Skorokhod integral) of a polynomial vector field:
// delta(V) = sum_k (V_k * eta_k - dV_k/deta_k). Adjoint to the Malliavin
// derivative in L^2(gaussian).
template <class Coeff>
GaussianPolynomial<Coeff> skorokhod(const PolyVector<Coeff>& v) {
    if (v.empty()) throw ValidationError("divergence of an empty vector field");
    const int modes = v.front().modes();
    GaussianPolynomial<Coeff> out(modes);
    for (int k = 0; k < static_cast<int>(v.size()); ++k) {
        if (v[static_cast<std::size_t>(k)].modes() != modes)
            throw ValidationError("vector field components have mismatched mode counts");
        const auto& comp = v[static_cast<std::size_t>(k)];
        out += comp * GaussianPolynomial<Coeff>::coordinate(modes, k);
        out -= comp.derivative(k);
    }
    return out;
}

// Number operator N = delta D; multiplies the degree-n chaos by n.
template <class Coeff>
GaussianPolynomial<Coeff> number_operator(const GaussianPolynomial<Coeff>& p) {
    return skorokhod(malliavin(p));
}

// Product of one-dimensional (probabilists') Hermite polynomials
// He_{e_1}(eta_1) * ... * He_{e_M}(eta_M); the chaos-degree-|e| element whose
// leading monomial is eta^e with coefficient 1.
template <class Coeff>
GaussianPolynomial<Coeff> hermite_product(int modes, const ExponentVec& e) {
    if (static_cast<int>(e.size()) != modes)
        throw ValidationError("exponent vector length does not match mode count");
    auto out = GaussianPolynomial<Coeff>::constant(modes, CoeffTraits<Coeff>::from_int(1));
    for (int k = 0; k < modes; ++k) {
        const std::uint32_t n = e[static_cast<std::size_t>(k)];
        if (n == 0) continue;
        // He_0 = 1, He_1 = x, He_{j+1} = x He_j - j He_{j-1}.
        auto x = GaussianPolynomial<Coeff>::coordinate(modes, k);
        auto prev = GaussianPolynomial<Coeff>::constant(modes, CoeffTraits<Coeff>::from_int(1));
        auto cur = x;
        for (std::uint32_t j = 1; j < n; ++j) {
            auto next = x * cur - prev.scaled(CoeffTraits<Coeff>::from_int(j));
            prev = cur;
            cur = next;
        }
        out = out * cur;
    }
    return out;
}

// Wiener chaos decomposition: out[n] is the projection onto the n-th chaos,
// and sum_n out[n] == p exactly. Computed by orthogonalization against lower
// chaoses in leading-term form: the top-degree monomials of the remainder are
// completed to product-Hermite elements (which span the top chaos and have
// exactly those leading terms), subtracted, and the degree drops.
template <class Coeff>
std::vector<GaussianPolynomial<Coeff>> chaos_decompose(const GaussianPolynomial<Coeff>& p) {
    std::vector<GaussianPolynomial<Coeff>> out(
        static_cast<std::size_t>(std::max(0, p.total_degree()) + 1),
        GaussianPolynomial<Coeff>(p.modes()));
    GaussianPolynomial<Coeff> rem = p;
    while (!rem.is_zero()) {
        const int d = rem.total_degree();
        GaussianPolynomial<Coeff> comp(p.modes());
        for (const auto& [e, c] : rem.terms()) {
            long deg = 0;
            for (auto v : e) deg += v;
            if (static_cast<int>(deg) == d)
                comp += hermite_product<Coeff>(p.modes(), e).scaled(c);
        }
        out[static_cast<std::size_t>(d)] = comp;
        rem -= comp;
        if (!rem.is_zero() && rem.total_degree() >= d)
            throw NumericalError("chaos decomposition failed to reduce degree");
    }
    return out;
}

// Coefficients of p in the product-Hermite basis: p = sum_e c_e He_e.
// Same peeling loop as chaos_decompose, recording coefficients instead of
// assembling the components.
template <class Coeff>
std::map<ExponentVec, Coeff> hermite_coefficients(const GaussianPolynomial<Coeff>& p) {
    std::map<ExponentVec, Coeff> out;
    GaussianPolynomial<Coeff> rem = p;
    while (!rem.is_zero()) {
        const int d = rem.total_degree();
        GaussianPolynomial<Coeff> peel(p.modes());
        for (const auto& [e, c] : rem.terms()) {
            long deg = 0;
            for (auto v : e) deg += v;
            if (static_cast<int>(deg) != d) continue;
            out[e] = c;
            peel += hermite_product<Coeff>(p.modes(), e).scaled(c);
        }
        rem -= peel;
        if (!rem.is_zero() && rem.total_degree() >= d)
            throw NumericalError("hermite expansion failed to reduce degree");
    }
    return out;
}

// E[He_e^2] = prod_i e_i!
template <class Coeff>
Coeff hermite_norm_sq(const ExponentVec& e) {
    Coeff m = CoeffTraits<Coeff>::from_int(1);
    for (auto v : e)
        for (std::uint32_t j = 2; j <= v; ++j) m *= CoeffTraits<Coeff>::from_int(j);
    return m;
}

template <class Coeff>
GaussianPolynomial<Coeff> chaos_project(const GaussianPolynomial<Coeff>& p, int n) {
    if (n < 0) throw ValidationError("chaos level must be nonnegative");
    auto comps = chaos_decompose(p);
    if (n >= static_cast<int>(comps.size())) return GaussianPolynomial<Coeff>(p.modes());
    return comps[static_cast<std::size_t>(n)];
}

// Apply f(N) for a scalar function of the number operator: each chaos level n
// is scaled by f(n).
template <class Coeff>
GaussianPolynomial<Coeff> apply_spectral_function(const GaussianPolynomial<Coeff>& p,
                                                  const std::function<Coeff(int)>& f) {
    auto comps = chaos_decompose(p);
    GaussianPolynomial<Coeff> out(p.modes());
    for (int n = 0; n < static_cast<int>(comps.size()); ++n)
        out += comps[static_cast<std::size_t>(n)].scaled(f(n));
    return out;
}

// Truncation 1_{N <= n}: drop all chaos levels above n.
template <class Coeff>
GaussianPolynomial<Coeff> chaos_truncate(const GaussianPolynomial<Coeff>& p, int n) {
    auto comps = chaos_decompose(p);
    GaussianPolynomial<Coeff> out(p.modes());
    for (int j = 0; j <= n && j < static_cast<int>(comps.size()); ++j)
        out += comps[static_cast<std::size_t>(j)];
    return out;
}

} // namespace spdelab
