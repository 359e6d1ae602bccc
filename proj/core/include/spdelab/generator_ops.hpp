#pragma once

// The Markov generator of the spectral dynamics, acting on Gaussian
// polynomials: the symmetric Ornstein-Uhlenbeck part L0 and the antisymmetric
// drift part G built from a trilinear coupling form. Everything here is
// templated on the coefficient type so the operator identities can be checked
// with exact rational arithmetic.

#include <vector>

#include "spdelab/polynomial.hpp"

namespace spdelab {

// Dense trilinear array B(k,l,m) = <B(e_k, e_l), e_m>, symmetric in (k,l).
template <class Coeff>
class TrilinearForm {
public:
    TrilinearForm() = default;
    explicit TrilinearForm(int modes)
        : modes_(modes),
          data_(static_cast<std::size_t>(modes) * modes * modes, CoeffTraits<Coeff>::from_int(0)) {
        if (modes < 0) throw ValidationError("negative mode count");
    }

    int modes() const { return modes_; }

    const Coeff& operator()(int k, int l, int m) const { return data_[index(k, l, m)]; }
    void set(int k, int l, int m, const Coeff& v) {
        data_[index(k, l, m)] = v;
        data_[index(l, k, m)] = v; // keep (k,l) symmetry by construction
    }

    // max |B(k,l,m) + B(m,k,l) + B(l,m,k)| as double, 0 for an exactly
    // cyclic-free form. The drift's divergence-free structure rests on this.
    double max_cyclic_defect() const {
        double worst = 0.0;
        for (int k = 0; k < modes_; ++k)
            for (int l = 0; l < modes_; ++l)
                for (int m = 0; m < modes_; ++m) {
                    Coeff s = (*this)(k, l, m) + (*this)(m, k, l) + (*this)(l, m, k);
                    double v = to_double(s);
                    if (v < 0) v = -v;
                    if (v > worst) worst = v;
                }
        return worst;
    }

private:
    std::size_t index(int k, int l, int m) const {
        if (k < 0 || l < 0 || m < 0 || k >= modes_ || l >= modes_ || m >= modes_)
            throw ValidationError("trilinear index out of range");
        return (static_cast<std::size_t>(k) * modes_ + l) * modes_ + m;
    }

    int modes_ = 0;
    std::vector<Coeff> data_;
};

// One-mode divergence delta_k(P) = P*eta_k - dP/deta_k, the building block of
// iterated divergences.
template <class Coeff>
GaussianPolynomial<Coeff> divergence_component(const GaussianPolynomial<Coeff>& p, int k) {
    return p * GaussianPolynomial<Coeff>::coordinate(p.modes(), k) - p.derivative(k);
}

// Ornstein-Uhlenbeck generator with eigenvalue vector lambda:
// L0 F = sum_k lambda_k (d^2F/deta_k^2 - eta_k dF/deta_k).
template <class Coeff>
GaussianPolynomial<Coeff> l0_apply(const GaussianPolynomial<Coeff>& f,
                                   const std::vector<Coeff>& lambda) {
    if (static_cast<int>(lambda.size()) != f.modes())
        throw ValidationError("eigenvalue vector length does not match mode count");
    GaussianPolynomial<Coeff> out(f.modes());
    for (int k = 0; k < f.modes(); ++k) {
        auto dk = f.derivative(k);
        auto term = dk.derivative(k) -
                    dk * GaussianPolynomial<Coeff>::coordinate(f.modes(), k);
        out += term.scaled(lambda[static_cast<std::size_t>(k)]);
    }
    return out;
}

enum class GeneratorPart { full, raising, lowering };

// Drift generator built from the trilinear form B.
//
//   full:     G F = sum_k dF/deta_k * sum_{l,m} (eta_l eta_m - delta_lm) B(l,m,k)
//   raising:  G+ F = sum_{k,l} delta_l( delta_k( sum_m B(k,l,m) dF/deta_m ) )
//   lowering: G- F = 2 sum_{k,l} delta_k( sum_m B(k,l,m) d^2F/(deta_m deta_l) )
//
// For cyclic-free B, full == raising + lowering, G+ raises the chaos level by
// one, G- lowers it by one, and E[(G+ F) G] = -E[F (G- G)].
template <class Coeff>
GaussianPolynomial<Coeff> g_apply(const GaussianPolynomial<Coeff>& f,
                                  const TrilinearForm<Coeff>& b,
                                  GeneratorPart part = GeneratorPart::full) {
    const int modes = f.modes();
    if (b.modes() != modes)
        throw ValidationError("trilinear form mode count does not match polynomial");
    GaussianPolynomial<Coeff> out(modes);

    if (part == GeneratorPart::full) {
        for (int k = 0; k < modes; ++k) {
            auto dk = f.derivative(k);
            if (dk.is_zero()) continue;
            GaussianPolynomial<Coeff> quad(modes);
            for (int l = 0; l < modes; ++l) {
                for (int m = 0; m < modes; ++m) {
                    const Coeff& c = b(l, m, k);
                    if (CoeffTraits<Coeff>::is_zero(c)) continue;
                    auto mono = GaussianPolynomial<Coeff>::coordinate(modes, l) *
                                GaussianPolynomial<Coeff>::coordinate(modes, m);
                    if (l == m)
                        mono -= GaussianPolynomial<Coeff>::constant(
                            modes, CoeffTraits<Coeff>::from_int(1));
                    out += (dk * mono).scaled(c);
                }
            }
        }
        return out;
    }

    if (part == GeneratorPart::raising) {
        for (int k = 0; k < modes; ++k) {
            for (int l = 0; l < modes; ++l) {
                GaussianPolynomial<Coeff> s(modes);
                for (int m = 0; m < modes; ++m) {
                    const Coeff& c = b(k, l, m);
                    if (CoeffTraits<Coeff>::is_zero(c)) continue;
                    s += f.derivative(m).scaled(c);
                }
                if (s.is_zero()) continue;
                out += divergence_component(divergence_component(s, k), l);
            }
        }
        return out;
    }

    for (int k = 0; k < modes; ++k) {
        for (int l = 0; l < modes; ++l) {
            GaussianPolynomial<Coeff> s(modes);
            for (int m = 0; m < modes; ++m) {
                const Coeff& c = b(k, l, m);
                if (CoeffTraits<Coeff>::is_zero(c)) continue;
                s += f.derivative(m).derivative(l).scaled(c);
            }
            if (s.is_zero()) continue;
            out += divergence_component(s, k).scaled(CoeffTraits<Coeff>::from_int(2));
        }
    }
    return out;
}

// Squared homogeneous first-order form sum_k w_k E[(dF/deta_k)^2] for a
// diagonal weight vector w (the V-dot weights of a spectral model).
template <class Coeff>
Coeff dirichlet_form_sq(const GaussianPolynomial<Coeff>& f, const std::vector<Coeff>& w) {
    if (static_cast<int>(w.size()) != f.modes())
        throw ValidationError("weight vector length does not match mode count");
    Coeff acc = CoeffTraits<Coeff>::from_int(0);
    for (int k = 0; k < f.modes(); ++k) {
        auto dk = f.derivative(k);
        if (dk.is_zero()) continue;
        acc += w[static_cast<std::size_t>(k)] * expectation(dk * dk);
    }
    return acc;
}

// Squared weighted second-derivative form sum_{k,l} w_k E[(d^2F/deta_k deta_l)^2],
// the Hilbert-Schmidt norm of the second Malliavin derivative with the first
// slot measured in the w-weighted space and the second in L^2.
template <class Coeff>
Coeff second_derivative_form_sq(const GaussianPolynomial<Coeff>& f, const std::vector<Coeff>& w) {
    if (static_cast<int>(w.size()) != f.modes())
        throw ValidationError("weight vector length does not match mode count");
    Coeff acc = CoeffTraits<Coeff>::from_int(0);
    for (int k = 0; k < f.modes(); ++k) {
        auto dk = f.derivative(k);
        if (dk.is_zero()) continue;
        for (int l = 0; l < f.modes(); ++l) {
            auto dkl = dk.derivative(l);
            if (dkl.is_zero()) continue;
            acc += w[static_cast<std::size_t>(k)] * expectation(dkl * dkl);
        }
    }
    return acc;
}

} // namespace spdelab
