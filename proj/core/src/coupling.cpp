#include "spdelab/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <sstream>
#include <utility>

#include "spdelab/quadrature.hpp"
#include "spdelab/trig.hpp"

namespace spdelab {
namespace {

constexpr double kSqrt2 = 1.41421356237309504880168872420969808;

using PairLists = std::vector<std::vector<CouplingTensor::PairEntry>>;

void push_entry(PairLists& lists, int k, int l, int m, double value) {
    if (value == 0.0) return;
    if (k > l) std::swap(k, l);
    lists[static_cast<std::size_t>(m)].push_back({k, l, value});
}

bool pair_less(const CouplingTensor::PairEntry& a, const CouplingTensor::PairEntry& b) {
    return a.k != b.k ? a.k < b.k : a.l < b.l;
}

// Sort each output list and merge duplicate pairs so lookups can bisect.
void finalize(CouplingTensor& tensor) {
    for (auto& list : tensor.by_output) {
        std::sort(list.begin(), list.end(), pair_less);
        std::vector<CouplingTensor::PairEntry> merged;
        merged.reserve(list.size());
        for (const auto& e : list) {
            if (!merged.empty() && merged.back().k == e.k && merged.back().l == e.l) {
                merged.back().value += e.value;
            } else {
                merged.push_back(e);
            }
        }
        list = std::move(merged);
    }
}

// Sine frame, exact: the product of two sine modes couples only to the sum
// and difference frequencies, B[k][l][m] = (f_m pi / sqrt 2) on the sum and
// the negative of that on the difference.
CouplingTensor sine_closed_form(int mode_count) {
    CouplingTensor t;
    t.mode_count = mode_count;
    t.by_output.resize(static_cast<std::size_t>(mode_count));
    for (int k = 0; k < mode_count; ++k) {
        for (int l = k; l < mode_count; ++l) {
            const int p = k + 1;
            const int q = l + 1;
            if (p + q <= mode_count) {
                push_entry(t.by_output, k, l, p + q - 1, (p + q) * kPi / kSqrt2);
            }
            const int diff = q - p;
            if (diff >= 1 && diff <= mode_count) {
                push_entry(t.by_output, k, l, diff - 1, -diff * kPi / kSqrt2);
            }
        }
    }
    return t;
}

double cosine_boundary_value(int j, double x) {
    if (j == 0) return 1.0;
    return x > 0.5 ? (j % 2 == 0 ? kSqrt2 : -kSqrt2) : kSqrt2;
}

// Cosine frame, exact. The entry splits as -int e_k e_l e_m' plus a third of
// the endpoint bracket [e_k e_l e_m]_0^1; the bracket share is what makes the
// cyclic sum and the cubic null form vanish identically on this frame.
double neumann_closed_entry(int k, int l, int m) {
    if (k > l) std::swap(k, l);
    double integral = 0.0;
    if (m >= 1) {
        const double factor = kSqrt2 * m * kPi;
        if (k == 0 && l == 0) {
            integral = factor * integral_sin_cos(m, 0, 0.0, 1.0);
        } else if (k == 0) {
            integral = factor * kSqrt2 * integral_sin_cos(m, l, 0.0, 1.0);
        } else {
            integral = factor * (integral_sin_cos(m, k + l, 0.0, 1.0) +
                                 integral_sin_cos(m, l - k, 0.0, 1.0));
        }
    }
    const double at_one =
        cosine_boundary_value(k, 1.0) * cosine_boundary_value(l, 1.0) * cosine_boundary_value(m, 1.0);
    const double at_zero =
        cosine_boundary_value(k, 0.0) * cosine_boundary_value(l, 0.0) * cosine_boundary_value(m, 0.0);
    return integral + (at_one - at_zero) / 3.0;
}

CouplingTensor neumann_closed_form(int mode_count) {
    CouplingTensor t;
    t.mode_count = mode_count;
    t.by_output.resize(static_cast<std::size_t>(mode_count));
    for (int k = 0; k < mode_count; ++k) {
        for (int l = k; l < mode_count; ++l) {
            for (int m = 0; m < mode_count; ++m) {
                push_entry(t.by_output, k, l, m, neumann_closed_entry(k, l, m));
            }
        }
    }
    return t;
}

// Numerically diagonalized models: assemble on the sine frame and rotate all
// three slots by the change-of-basis matrix. The eigenfunctions span exactly
// the truncated sine space, so no tail is lost.
CouplingTensor conjugated_closed_form(const SpectralModel& model) {
    const int n = model.mode_count;
    const CouplingTensor base = sine_closed_form(n);
    const Eigen::MatrixXd& u = model.frame_to_eigen;

    std::vector<Eigen::MatrixXd> rotated(static_cast<std::size_t>(n),
                                         Eigen::MatrixXd::Zero(n, n));
    Eigen::MatrixXd slice = Eigen::MatrixXd::Zero(n, n);
    for (int m = 0; m < n; ++m) {
        slice.setZero();
        for (const auto& e : base.by_output[static_cast<std::size_t>(m)]) {
            slice(e.k, e.l) = e.value;
            slice(e.l, e.k) = e.value;
        }
        const Eigen::MatrixXd pair_rotated = u.transpose() * slice * u;
        for (int c = 0; c < n; ++c) {
            rotated[static_cast<std::size_t>(c)] += u(m, c) * pair_rotated;
        }
    }

    CouplingTensor t;
    t.mode_count = n;
    t.by_output.resize(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
        for (int k = 0; k < n; ++k) {
            for (int l = k; l < n; ++l) {
                push_entry(t.by_output, k, l, c, rotated[static_cast<std::size_t>(c)](k, l));
            }
        }
    }
    return t;
}

CouplingTensor quadrature_form(const SpectralModel& model) {
    const int n = model.mode_count;
    const int max_freq = model.frame_frequency(n - 1);
    const PanelGrid edges = frequency_panels(0.0, 1.0, 2.0 / (3.0 * max_freq + 8.0), 8);
    const PanelRule& rule = gauss_legendre_16();

    std::vector<double> xs;
    std::vector<double> ws;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double mid = 0.5 * (edges[p] + edges[p + 1]);
        const double half = 0.5 * (edges[p + 1] - edges[p]);
        for (int q = 0; q < rule.size; ++q) {
            xs.push_back(mid + half * rule.nodes[q]);
            ws.push_back(half * rule.weights[q]);
        }
    }
    const int nq = static_cast<int>(xs.size());

    Eigen::MatrixXd frame_vals(n, nq);
    Eigen::MatrixXd frame_derivs(n, nq);
    for (int j = 0; j < n; ++j) {
        const int f = model.frame_frequency(j);
        for (int q = 0; q < nq; ++q) {
            const double x = xs[static_cast<std::size_t>(q)];
            if (model.frame == BasisFrame::sine) {
                frame_vals(j, q) = kSqrt2 * std::sin(f * kPi * x);
                frame_derivs(j, q) = kSqrt2 * f * kPi * std::cos(f * kPi * x);
            } else if (f == 0) {
                frame_vals(j, q) = 1.0;
                frame_derivs(j, q) = 0.0;
            } else {
                frame_vals(j, q) = kSqrt2 * std::cos(f * kPi * x);
                frame_derivs(j, q) = -kSqrt2 * f * kPi * std::sin(f * kPi * x);
            }
        }
    }
    Eigen::MatrixXd vals;
    Eigen::MatrixXd derivs;
    if (model.diagonal_frame()) {
        vals = std::move(frame_vals);
        derivs = std::move(frame_derivs);
    } else {
        vals = model.frame_to_eigen.transpose() * frame_vals;
        derivs = model.frame_to_eigen.transpose() * frame_derivs;
    }

    const bool boundary = model.frame == BasisFrame::cosine;
    Eigen::VectorXd at_zero(n);
    Eigen::VectorXd at_one(n);
    if (boundary) {
        for (int j = 0; j < n; ++j) {
            at_zero(j) = model.basis_eval(j, 0.0);
            at_one(j) = model.basis_eval(j, 1.0);
        }
    }

    const Eigen::Map<const Eigen::ArrayXd> weight(ws.data(), nq);
    CouplingTensor t;
    t.mode_count = n;
    t.by_output.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        for (int l = k; l < n; ++l) {
            const Eigen::VectorXd profile =
                (vals.row(k).transpose().array() * vals.row(l).transpose().array() * weight)
                    .matrix();
            const Eigen::VectorXd column = -(derivs * profile);
            for (int m = 0; m < n; ++m) {
                double value = column(m);
                if (boundary) {
                    value += (at_one(k) * at_one(l) * at_one(m) -
                              at_zero(k) * at_zero(l) * at_zero(m)) /
                             3.0;
                }
                push_entry(t.by_output, k, l, m, value);
            }
        }
    }
    return t;
}

// Tensor product with the component coupling: folded index c * M + k.
CouplingTensor fold_components(const CouplingTensor& base, const GammaTensor& gamma) {
    const int d = gamma.components;
    const int n = base.mode_count;
    CouplingTensor t;
    t.mode_count = n;
    t.components = d;
    t.by_output.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(d));
    for (int m = 0; m < n; ++m) {
        for (const auto& e : base.by_output[static_cast<std::size_t>(m)]) {
            for (int c = 0; c < d; ++c) {
                for (int i = 0; i < d; ++i) {
                    for (int j = 0; j < d; ++j) {
                        if (e.k == e.l && j < i) continue; // unordered pair seen once
                        const double g = gamma(i, j, c);
                        if (g == 0.0) continue;
                        push_entry(t.by_output, i * n + e.k, j * n + e.l, c * n + m,
                                   g * e.value);
                    }
                }
            }
        }
    }
    return t;
}

void check_state(const CouplingTensor& tensor, const Eigen::VectorXd& u, int level) {
    if (level < 0) throw ValidationError("truncation level must be nonnegative");
    if (level > tensor.mode_count) {
        throw ValidationError("truncation level exceeds mode count");
    }
    if (u.size() != tensor.folded_count()) {
        throw ValidationError("state vector length must match folded mode count");
    }
}

} // namespace

void validate_gamma(const GammaTensor& gamma) {
    if (gamma.components < 1) throw ValidationError("component count must be at least 1");
    if (gamma.values.empty()) return;
    const int d = gamma.components;
    const std::size_t expected =
        static_cast<std::size_t>(d) * static_cast<std::size_t>(d) * static_cast<std::size_t>(d);
    if (gamma.values.size() != expected) {
        throw ValidationError("component coupling tensor has wrong size");
    }
    double scale = 0.0;
    for (double v : gamma.values) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * (1.0 + scale);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            for (int k = 0; k < d; ++k) {
                const double v = gamma(i, j, k);
                if (std::abs(v - gamma(i, k, j)) > tol || std::abs(v - gamma(j, i, k)) > tol ||
                    std::abs(v - gamma(j, k, i)) > tol || std::abs(v - gamma(k, i, j)) > tol ||
                    std::abs(v - gamma(k, j, i)) > tol) {
                    throw ValidationError("component coupling tensor must be fully symmetric");
                }
            }
        }
    }
}

double CouplingTensor::entry(int k, int l, int m) const {
    if (k > l) std::swap(k, l);
    const auto& list = by_output[static_cast<std::size_t>(m)];
    const PairEntry probe{k, l, 0.0};
    const auto it = std::lower_bound(list.begin(), list.end(), probe, pair_less);
    if (it != list.end() && it->k == k && it->l == l) return it->value;
    return 0.0;
}

std::vector<double> CouplingTensor::renormalization() const {
    std::vector<double> r(by_output.size(), 0.0);
    for (std::size_t m = 0; m < by_output.size(); ++m) {
        for (const auto& e : by_output[m]) {
            if (e.k == e.l) r[m] += e.value;
        }
    }
    return r;
}

double CouplingTensor::max_cyclic_defect() const {
    const int n = folded_count();
    double worst = 0.0;
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            for (int m = 0; m < n; ++m) {
                const double defect = entry(k, l, m) + entry(m, k, l) + entry(l, m, k);
                worst = std::max(worst, std::abs(defect));
            }
        }
    }
    return worst;
}

CouplingTensor assemble_coupling(const SpectralModel& model, AssemblyMethod method,
                                 const GammaTensor& gamma) {
    const int d = model.params.components;
    if (d > 1 && gamma.values.empty()) {
        throw ValidationError("component coupling tensor required for several components");
    }
    if (!gamma.values.empty()) {
        if (gamma.components != d) {
            throw ValidationError("component coupling tensor size must match component count");
        }
        validate_gamma(gamma);
    }

    CouplingTensor base;
    if (method == AssemblyMethod::quadrature) {
        base = quadrature_form(model);
    } else {
        switch (model.kind) {
            case ModelKind::dirichlet_laplacian:
                base = sine_closed_form(model.mode_count);
                break;
            case ModelKind::neumann_hyperviscous:
                base = neumann_closed_form(model.mode_count);
                break;
            default:
                base = conjugated_closed_form(model);
                break;
        }
    }

    CouplingTensor result = d > 1 ? fold_components(base, gamma) : std::move(base);
    finalize(result);
    return result;
}

Eigen::VectorXd drift_eval(const CouplingTensor& tensor, const Eigen::VectorXd& u, int level) {
    check_state(tensor, u, level);
    const int n = tensor.mode_count;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(tensor.folded_count());
    for (int m = 0; m < tensor.folded_count(); ++m) {
        if (m % n >= level) continue;
        double acc = 0.0;
        for (const auto& e : tensor.by_output[static_cast<std::size_t>(m)]) {
            if (e.k % n >= level || e.l % n >= level) continue;
            if (e.k == e.l) {
                acc += (u(e.k) * u(e.k) - 1.0) * e.value;
            } else {
                acc += 2.0 * u(e.k) * u(e.l) * e.value;
            }
        }
        g(m) = acc;
    }
    return g;
}

double drift_divergence(const CouplingTensor& tensor, const Eigen::VectorXd& u, int level) {
    check_state(tensor, u, level);
    const int n = tensor.mode_count;
    double total = 0.0;
    for (int m = 0; m < tensor.folded_count(); ++m) {
        if (m % n >= level) continue;
        double acc = 0.0;
        for (const auto& e : tensor.by_output[static_cast<std::size_t>(m)]) {
            if (e.k % n >= level || e.l % n >= level) continue;
            if (e.k == m && e.l == m) {
                acc += u(m) * e.value;
            } else if (e.k == m) {
                acc += u(e.l) * e.value;
            } else if (e.l == m) {
                acc += u(e.k) * e.value;
            }
        }
        total += 2.0 * acc;
    }
    return total;
}

Eigen::VectorXd b_of_tensor(const CouplingTensor& tensor, const Eigen::MatrixXd& phi) {
    const int n = tensor.folded_count();
    if (phi.rows() != n || phi.cols() != n) {
        throw ValidationError("tensor argument must be square with folded mode count");
    }
    double scale = phi.cwiseAbs().maxCoeff();
    if ((phi - phi.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + scale)) {
        throw ValidationError("tensor argument must be symmetric");
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int m = 0; m < n; ++m) {
        double acc = 0.0;
        for (const auto& e : tensor.by_output[static_cast<std::size_t>(m)]) {
            if (e.k == e.l) {
                acc += phi(e.k, e.k) * e.value;
            } else {
                acc += (phi(e.k, e.l) + phi(e.l, e.k)) * e.value;
            }
        }
        out(m) = acc;
    }
    return out;
}

double apply_B_pairing(const CouplingTensor& tensor, const Eigen::MatrixXd& phi,
                       const Eigen::VectorXd& f) {
    if (f.size() != tensor.folded_count()) {
        throw ValidationError("pairing vector length must match folded mode count");
    }
    return f.dot(b_of_tensor(tensor, phi));
}

CouplingTensor conjugate_pair_slots(const CouplingTensor& tensor, const Eigen::MatrixXd& r) {
    const int n = tensor.folded_count();
    if (r.rows() != n || r.cols() != n) {
        throw ValidationError("pair transport matrix must be square with folded mode count");
    }
    CouplingTensor out;
    out.mode_count = tensor.mode_count;
    out.components = tensor.components;
    out.by_output.resize(tensor.by_output.size());
    Eigen::MatrixXd slice(n, n);
    for (int m = 0; m < n; ++m) {
        slice.setZero();
        for (const auto& e : tensor.by_output[static_cast<std::size_t>(m)]) {
            slice(e.k, e.l) = e.value;
            slice(e.l, e.k) = e.value;
        }
        const Eigen::MatrixXd moved = r.transpose() * slice * r;
        for (int k = 0; k < n; ++k) {
            for (int l = k; l < n; ++l) {
                push_entry(out.by_output, k, l, m, moved(k, l));
            }
        }
    }
    finalize(out);
    return out;
}

std::string tensor_to_csv(const CouplingTensor& tensor) {
    std::ostringstream out;
    out << "k,l,m,value\n" << std::setprecision(17);
    for (std::size_t m = 0; m < tensor.by_output.size(); ++m) {
        for (const auto& e : tensor.by_output[m]) {
            out << e.k << ',' << e.l << ',' << m << ',' << e.value << '\n';
        }
    }
    return out.str();
}

} // namespace spdelab
