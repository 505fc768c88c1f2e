#include "wqed/pair_solver.hpp"

#include <cmath>

namespace wqed {

TwoExcitationEngine::TwoExcitationEngine(const SpinModel& model) {
    model.validate();
    if (!model.interaction.hardcore)
        throw ModelError("two-excitation engine supports hardcore exclusion only");
    const auto& lv = model.levels;
    n_ = model.n_sites();
    m_ = lv.modes_per_site();
    S_ = n_ * m_;
    k_ = model.geometry.k_in;
    z_ = model.geometry.positions;
    rabi_ = lv.kind == LevelKind::ThreeLevelEIT ? lv.rabi : 0.0;
    wg_ = -kI * (lv.gamma_1d / 2.0);

    const double delta = model.detuning();
    h_diag_.resize(S_);
    phase_pos_.resize(n_);
    phase_neg_.resize(n_);
    for (int j = 0; j < n_; ++j) {
        // the waveguide self-term -i Gamma_1D/2 is added by the prefix sums
        h_diag_[j * m_] = Complex(-(lv.delta_l + delta), -lv.gamma_prime / 2.0);
        if (m_ == 2) h_diag_[j * m_ + 1] = Complex(-delta, 0.0);
        phase_pos_[j] = std::exp(kI * k_ * z_[j]);
        phase_neg_[j] = std::conj(phase_pos_[j]);
    }

    v_diag_ = Vector::Zero(product_dim());
    if (m_ == 2 && model.interaction.u_ss.size() > 0) {
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                if (i == j) continue;
                const Eigen::Index x1 = i * m_ + 1, x2 = j * m_ + 1;
                v_diag_[x1 * S_ + x2] = model.interaction.u_ss(i, j);
            }
    }

    for (int site = 0; site < n_; ++site)
        for (int a = 0; a < m_; ++a)
            for (int b = 0; b < m_; ++b)
                same_site_.push_back(static_cast<Eigen::Index>(site * m_ + a) * S_ +
                                     site * m_ + b);

    // diagonal of -H2 for Jacobi preconditioning
    neg_diag_.resize(product_dim());
    const Complex self = wg_;  // j = l waveguide term
    for (int x1 = 0; x1 < S_; ++x1)
        for (int x2 = 0; x2 < S_; ++x2) {
            Complex d = h_diag_[x1] + h_diag_[x2] + v_diag_[x1 * S_ + x2];
            if (x1 % m_ == 0) d += self;
            if (x2 % m_ == 0) d += self;
            neg_diag_[static_cast<Eigen::Index>(x1) * S_ + x2] = -d;
        }
}

void TwoExcitationEngine::apply_h1(const Complex* x, Complex* y) const {
    for (int s = 0; s < S_; ++s) y[s] = h_diag_[s] * x[s];
    if (m_ == 2 && rabi_ != 0.0) {
        for (int j = 0; j < n_; ++j) {
            y[j * m_] += -rabi_ * x[j * m_ + 1];
            y[j * m_ + 1] += -rabi_ * x[j * m_];
        }
    }
    // waveguide: w_i = sum_j e^{i k |z_i - z_j|} x_a(j), via prefix/suffix sums
    Complex pre{0.0, 0.0};
    for (int j = 0; j < n_; ++j) {
        pre += phase_neg_[j] * x[j * m_];
        y[j * m_] += wg_ * phase_pos_[j] * pre;
    }
    Complex suf{0.0, 0.0};
    for (int j = n_ - 1; j >= 0; --j) {
        y[j * m_] += wg_ * phase_neg_[j] * suf;
        suf += phase_pos_[j] * x[j * m_];
    }
}

void TwoExcitationEngine::project(Vector& x) const {
    for (auto i : same_site_) x[i] = Complex(0.0, 0.0);
}

void TwoExcitationEngine::apply_neg_h2(const Vector& x, Vector& y) const {
    y.resize(product_dim());
    // (h (x) I): apply h1 to each column of X (x viewed column-major S x S)
    Eigen::Map<const DenseMatrix> xm(x.data(), S_, S_);
    Eigen::Map<DenseMatrix> ym(y.data(), S_, S_);
    for (int c = 0; c < S_; ++c) apply_h1(xm.col(c).data(), ym.col(c).data());
    // (I (x) h): apply h1 along rows; use a transposed copy for stride-1 access
    DenseMatrix xt = xm.transpose();
    DenseMatrix yt(S_, S_);
    for (int c = 0; c < S_; ++c) apply_h1(xt.col(c).data(), yt.col(c).data());
    ym += yt.transpose();
    y += v_diag_.cwiseProduct(x);
    y = -y;
    project(y);
}

DenseMatrix TwoExcitationEngine::h1_dense() const {
    DenseMatrix h = DenseMatrix::Zero(S_, S_);
    DenseMatrix unit = DenseMatrix::Zero(S_, S_);
    for (int c = 0; c < S_; ++c) {
        unit.col(c).setZero();
        unit(c, c) = 1.0;
        apply_h1(unit.col(c).data(), h.col(c).data());
    }
    return h;
}

// y ~= (-H2free)^{-1} x through the Sylvester structure H2free X = H X + X H^T
// in the bi-orthogonal eigenbasis of the single-particle Hamiltonian.
void TwoExcitationEngine::precondition(const Vector& x, Vector& y) const {
    if (!es_) es_ = eigendecompose(h1_dense());
    const auto& es = *es_;
    Eigen::Map<const DenseMatrix> xm(x.data(), S_, S_);
    y.resize(product_dim());
    Eigen::Map<DenseMatrix> ym(y.data(), S_, S_);
    DenseMatrix r = es.left_inv * xm * es.left_inv.transpose();
    for (int l = 0; l < S_; ++l)
        for (int lp = 0; lp < S_; ++lp) {
            Complex d = -es.eigenvalues[l] - es.eigenvalues[lp];
            if (std::abs(d) < 1e-10) d = Complex(1e-10, 1e-10);
            r(l, lp) /= d;
        }
    ym = es.right * r * es.right.transpose();
    project(y);
}

Vector TwoExcitationEngine::solve(const Vector& rhs, double tol, int max_iter) const {
    Vector b = rhs;
    project(b);
    const double bnorm = b.norm();
    Vector x = Vector::Zero(product_dim());
    if (bnorm == 0.0) return x;

    Vector r = b;
    Vector rhat = r;
    Complex rho{1.0, 0.0}, alpha{1.0, 0.0}, omega{1.0, 0.0};
    Vector v = Vector::Zero(product_dim());
    Vector p = Vector::Zero(product_dim());
    Vector phat(product_dim()), s(product_dim()), shat(product_dim()), t(product_dim());

    int restarts = 0;
    for (int it = 0; it < max_iter; ++it) {
        const Complex rho1 = rhat.dot(r);
        if (std::abs(rho1) < 1e-300 * bnorm * bnorm) {
            if (++restarts > 3)
                throw NumericalError("BiCGSTAB breakdown in two-excitation solve");
            rhat = r;
            rho = alpha = omega = Complex(1.0, 0.0);
            v.setZero();
            p.setZero();
            continue;
        }
        const Complex beta = (rho1 / rho) * (alpha / omega);
        p = r + beta * (p - omega * v);
        precondition(p, phat);
        apply_neg_h2(phat, v);
        alpha = rho1 / rhat.dot(v);
        s = r - alpha * v;
        if (s.norm() <= tol * bnorm) {
            x += alpha * phat;
            break;
        }
        precondition(s, shat);
        apply_neg_h2(shat, t);
        omega = t.dot(s) / t.dot(t);
        x += alpha * phat + omega * shat;
        r = s - omega * t;
        rho = rho1;
        if (r.norm() <= tol * bnorm) break;
        if (it == max_iter - 1)
            throw NumericalError(
                "two-excitation solve did not converge (residual " +
                std::to_string(r.norm() / bnorm) + "); the drive may sit on an "
                "undamped two-excitation resonance");
    }
    return x;
}

Vector TwoExcitationEngine::symmetrized_product(const Vector& d, const Vector& v) const {
    if (d.size() != S_ || v.size() != S_)
        throw ModelError("vectors must live on the single-excitation slots");
    Vector phi(product_dim());
    Eigen::Map<DenseMatrix> pm(phi.data(), S_, S_);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    pm = inv_sqrt2 * (d * v.transpose() + v * d.transpose());
    project(phi);
    return phi;
}

Vector TwoExcitationEngine::lower(const Vector& phi, const Vector& site_coefficients) const {
    if (site_coefficients.size() != n_)
        throw ModelError("need one coefficient per site");
    Eigen::Map<const DenseMatrix> pm(phi.data(), S_, S_);
    Vector u = Vector::Zero(S_);
    for (int j = 0; j < n_; ++j)
        u += site_coefficients[j] * pm.row(j * m_).transpose();
    return std::sqrt(2.0) * u;
}

Vector TwoExcitationEngine::pack(const Vector& phi, const FewExcitationBasis& basis) const {
    Eigen::Map<const DenseMatrix> pm(phi.data(), S_, S_);
    const auto n2 = basis.sector_dim(2);
    const auto base = basis.sector_begin[2];
    Vector packed(n2);
    const double sqrt2 = std::sqrt(2.0);
    for (std::size_t i = 0; i < n2; ++i) {
        const auto slots = basis.slots(base + i);
        const auto s1 = slots[0], s2 = slots[1];
        packed[i] = s1 == s2 ? pm(s1, s1) : sqrt2 * pm(s1, s2);
    }
    return packed;
}

Vector TwoExcitationEngine::unpack(const Vector& packed, const FewExcitationBasis& basis) const {
    const auto n2 = basis.sector_dim(2);
    if (static_cast<std::size_t>(packed.size()) != n2)
        throw ModelError("packed vector does not match sector-2 dimension");
    const auto base = basis.sector_begin[2];
    Vector phi = Vector::Zero(product_dim());
    Eigen::Map<DenseMatrix> pm(phi.data(), S_, S_);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t i = 0; i < n2; ++i) {
        const auto slots = basis.slots(base + i);
        const auto s1 = slots[0], s2 = slots[1];
        if (s1 == s2) {
            pm(s1, s1) = packed[i];
        } else {
            pm(s1, s2) = inv_sqrt2 * packed[i];
            pm(s2, s1) = pm(s1, s2);
        }
    }
    return phi;
}

}  // namespace wqed
