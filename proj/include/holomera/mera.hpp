#pragma once

// Scale-invariant MERA state and its energy-minimization optimizer.
// A state is a short stack of transitional layers (lattice-scale detail)
// followed by one fixed layer repeated to infinity. Densities flow down from
// the fixed point of the descending channel; couplings flow up through the
// ascending channels; tensors are updated by linearizing the energy and
// taking the polar factor of the environment.

#include <cmath>
#include <string>
#include <vector>

#include "holomera/layer.hpp"
#include "holomera/linalg.hpp"
#include "holomera/model.hpp"
#include "holomera/rng.hpp"
#include "holomera/tensor.hpp"

namespace holomera {

struct ScaleInvariantMera {
    std::vector<MeraLayer> transitional;
    MeraLayer fixed_layer;
    TwoCouplingHamiltonian hamiltonian;  // physical couplings, unshifted
    index_t chi = 0;
    double shiftA = 0.0;  // identity offsets subtracted before coarse-graining
    double shiftB = 0.0;
    double energy_per_site = 0.0;
    double convergence_residual = 1.0;

    index_t depth() const { return static_cast<index_t>(transitional.size()); }

    const MeraLayer& layer(index_t ell) const {  // 1-based layer index
        detail::require(ell >= 1, "layer: 1-based index");
        if (ell <= depth()) return transitional[static_cast<size_t>(ell - 1)];
        return fixed_layer;
    }

    /// Coarse dimension after layer ell; ell = 0 is the physical lattice.
    index_t scale_dim(index_t ell) const {
        if (ell <= 0) return hamiltonian.site_dim;
        return layer(ell).coarse_dim();
    }
};

namespace mera_detail {

inline double tr_pair(const DenseTensor& r, const DenseTensor& o) {
    DenseTensor t = contract(r, o, {{0, 2}, {1, 3}, {2, 0}, {3, 1}});
    return t[0];
}

inline DenseTensor identity_op(index_t d) {
    return DenseTensor::identity(d * d).reshaped({d, d, d, d});
}

inline DensityPair maximally_mixed(index_t d) {
    DenseTensor rho = identity_op(d);
    rho *= 1.0 / static_cast<double>(d * d);
    return DensityPair{rho, rho};
}

}  // namespace mera_detail

/// Fixed point of the descending channel of one layer, by power iteration.
inline DensityPair scale_invariant_density(const MeraLayer& L, double tol = 1e-10,
                                           index_t max_iters = 5000) {
    detail::require(L.fine_dim() == L.coarse_dim(),
                    "scale_invariant_density: fixed layer must preserve dimension");
    DensityPair rho = mera_detail::maximally_mixed(L.coarse_dim());
    for (index_t it = 0; it < max_iters; ++it) {
        DensityPair next = descend_pair(rho, L);
        // channel is trace preserving; renormalize against drift anyway
        double tA = mera_detail::tr_pair(next.rhoA, mera_detail::identity_op(L.fine_dim()));
        double tB = mera_detail::tr_pair(next.rhoB, mera_detail::identity_op(L.fine_dim()));
        next.rhoA *= 1.0 / tA;
        next.rhoB *= 1.0 / tB;
        next.rhoA = symmetrized(next.rhoA);
        next.rhoB = symmetrized(next.rhoB);
        double delta = std::max((next.rhoA - rho.rhoA).max_abs(), (next.rhoB - rho.rhoB).max_abs());
        rho = next;
        if (delta < tol) break;
    }
    return rho;
}

/// Physical couplings with the recorded identity offsets removed.
inline CouplingPair shifted_base_couplings(const ScaleInvariantMera& m) {
    const index_t q = m.hamiltonian.site_dim;
    DenseTensor idA = mera_detail::identity_op(q), idB = mera_detail::identity_op(q);
    idA *= m.shiftA;
    idB *= m.shiftB;
    CouplingPair h{m.hamiltonian.hA, m.hamiltonian.hB};
    h.hA -= idA;
    h.hB -= idB;
    return h;
}

/// Couplings ascended to a given scale (0 = physical).
inline CouplingPair couplings_at_scale(const ScaleInvariantMera& m, index_t scale) {
    CouplingPair h = shifted_base_couplings(m);
    for (index_t ell = 1; ell <= scale; ++ell) h = ascend_pair(h, m.layer(ell));
    return h;
}

/// Bond density pairs at scales 0..top, descended from the fixed point.
inline std::vector<DensityPair> densities_by_scale(const ScaleInvariantMera& m, index_t top) {
    DensityPair rho = scale_invariant_density(m.fixed_layer);
    std::vector<DensityPair> out(static_cast<size_t>(top + 1), rho);
    for (index_t s = top; s-- > 0;) {
        const MeraLayer& L = m.layer(s + 1);
        if (s >= m.depth() ) {
            out[static_cast<size_t>(s)] = rho;  // scale-invariant regime
        } else {
            out[static_cast<size_t>(s)] =
                descend_pair(out[static_cast<size_t>(s + 1)], L);
        }
    }
    return out;
}

/// Energy per site of the physical lattice, evaluated at a given scale with
/// unshifted couplings; scale consistency of this number is a contraction
/// identity and is tested as such.
inline double energy_per_site_at_scale(const ScaleInvariantMera& m,
                                       const std::vector<DensityPair>& rho, index_t scale) {
    CouplingPair h{m.hamiltonian.hA, m.hamiltonian.hB};
    for (index_t ell = 1; ell <= scale; ++ell) h = ascend_pair(h, m.layer(ell));
    const DensityPair& r = rho[static_cast<size_t>(scale)];
    double cell = mera_detail::tr_pair(r.rhoA, h.hA) + mera_detail::tr_pair(r.rhoB, h.hB);
    return cell / (2.0 * std::pow(2.0, static_cast<double>(scale)));
}

inline double energy_per_site(const ScaleInvariantMera& m) {
    auto rho = densities_by_scale(m, m.depth());
    return energy_per_site_at_scale(m, rho, 0);
}

/// Max-channel relative defect of the self-similarity h' = h / 2^z at the
/// fixed layer, evaluated on the zero-shifted couplings.
inline double fixed_point_residual_between(const CouplingPair& h, const CouplingPair& h_up,
                                           double lambda) {
    DenseTensor dA = h_up.hA;
    DenseTensor sA = h.hA;
    sA *= 1.0 / lambda;
    dA -= sA;
    DenseTensor dB = h_up.hB;
    DenseTensor sB = h.hB;
    sB *= 1.0 / lambda;
    dB -= sB;
    double nA = h.hA.norm(), nB = h.hB.norm();
    double rA = (nA > 0) ? dA.norm() * lambda / nA : 0.0;
    double rB = (nB > 0) ? dB.norm() * lambda / nB : 0.0;
    return std::max(rA, rB);
}

inline double fixed_point_residual(const ScaleInvariantMera& m) {
    CouplingPair h = couplings_at_scale(m, m.depth());
    CouplingPair up = ascend_pair(h, m.fixed_layer);
    return fixed_point_residual_between(h, up, wilson_lambda(m.hamiltonian));
}

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

struct OptimizeSchedule {
    index_t transitional_layers = 2;
    index_t sweeps = 1200;
    index_t inner_iterations = 2;   // polar updates per tensor per sweep
    double energy_tol = 1e-10;      // sweep-to-sweep change that counts as converged
    double noise = 1e-3;            // seeded noise on the initial isometries
    std::uint64_t seed = 1;
    index_t tail_terms = 60;        // cap on the scale-averaged Hamiltonian sum
};

struct OptimizeReport {
    bool converged = false;
    bool energy_monotone = true;
    index_t sweeps_run = 0;
    double final_energy = 0.0;
    double residual = 1.0;
    std::vector<double> energy_trace;
    std::string warning;
};

namespace mera_detail {

inline DenseTensor polar_update(const DenseTensor& env, const std::vector<index_t>& out_axes,
                                const std::vector<index_t>& in_axes) {
    PolarResult p = polar_isometry(env, out_axes, in_axes);
    // polar_isometry returns [out..., in...]; reorder to the env's axis order
    std::vector<index_t> placed(out_axes.size() + in_axes.size());
    index_t pos = 0;
    for (index_t a : out_axes) placed[static_cast<size_t>(a)] = pos++;
    for (index_t a : in_axes) placed[static_cast<size_t>(a)] = pos++;
    return permute(p.isometry.tensor, placed);
}

inline MeraLayer initial_layer(const CouplingPair& h, index_t fine, index_t coarse, Rng& rng,
                               double noise) {
    MeraLayer L;
    L.u = DenseTensor::identity(fine * fine).reshaped({fine, fine, fine, fine});
    EighResult es = eigh_lowest(symmetrized(h.hA).reshaped({fine * fine, fine * fine}), coarse);
    DenseTensor w = es.vectors.tensor;  // [fine^2, coarse]
    for (index_t i = 0; i < w.size(); ++i) w[i] += noise * rng.gaussian();
    PolarResult p = polar_isometry(w, {0}, {1});
    DenseTensor wi = p.isometry.tensor;  // [fine^2, coarse]
    wi *= -1.0;  // polar factor carries a sign; orientation is irrelevant, keep it near the eigenbasis
    L.w = wi.reshaped({fine, fine, coarse});
    return L;
}

/// Sum of k-fold ascents of the scale-T couplings through the fixed layer,
/// truncated once the remainder is negligible. The couplings must be close
/// to traceless or the series will not decay.
inline CouplingPair scale_averaged_couplings(const CouplingPair& base, const MeraLayer& fixed,
                                             index_t max_terms) {
    CouplingPair sum = base;
    CouplingPair term = base;
    double base_norm = std::max(base.hA.norm(), base.hB.norm());
    for (index_t k = 1; k < max_terms; ++k) {
        term = ascend_pair(term, fixed);
        sum.hA += term.hA;
        sum.hB += term.hB;
        if (std::max(term.hA.norm(), term.hB.norm()) < 1e-13 * base_norm) break;
    }
    return sum;
}

/// Remove the density-weighted trace component so ascents decay.
inline CouplingPair traceless_against(const CouplingPair& h, const DensityPair& rho) {
    CouplingPair out = h;
    const index_t d = h.hA.dim(0);
    DenseTensor id = identity_op(d);
    DenseTensor tA = id, tB = id;
    tA *= tr_pair(rho.rhoA, h.hA);
    tB *= tr_pair(rho.rhoB, h.hB);
    out.hA -= tA;
    out.hB -= tB;
    return out;
}

}  // namespace mera_detail

/// Energy-minimizing sweep optimizer for the scale-invariant state.
inline OptimizeReport optimize_scale_invariant(ScaleInvariantMera& m, const OptimizeSchedule& sched) {
    m.hamiltonian.check();
    const index_t q = m.hamiltonian.site_dim;
    detail::require(m.chi >= q, "optimize: chi must be at least the site dimension");

    // layer dimension plan: the transitional stack must land exactly on chi
    std::vector<index_t> fine{q}, coarse;
    for (index_t ell = 0; ell < sched.transitional_layers; ++ell) {
        index_t f = fine.back();
        index_t c = std::min(f * f, m.chi);
        coarse.push_back(c);
        fine.push_back(c);
    }
    detail::require(fine.back() == m.chi,
                    "optimize: chi unreachable with this transitional layer count");

    Rng rng(sched.seed, "mera-init");
    CouplingPair h{m.hamiltonian.hA, m.hamiltonian.hB};
    m.transitional.clear();
    for (index_t ell = 0; ell < sched.transitional_layers; ++ell) {
        MeraLayer L = mera_detail::initial_layer(h, fine[static_cast<size_t>(ell)],
                                                 coarse[static_cast<size_t>(ell)], rng, sched.noise);
        m.transitional.push_back(L);
        h = ascend_pair(h, L);
    }
    m.fixed_layer = mera_detail::initial_layer(h, m.chi, m.chi, rng, sched.noise);

    OptimizeReport rep;
    const index_t T = m.depth();
    double prev_energy = 0.0;
    bool have_prev = false;

    for (index_t sweep = 0; sweep < sched.sweeps; ++sweep) {
        DensityPair rho_star = scale_invariant_density(m.fixed_layer);

        // densities at scales T..1 (rho[s] lives on the scale-s lattice)
        std::vector<DensityPair> rho(static_cast<size_t>(T + 1), rho_star);
        for (index_t s = T; s-- > 1;)
            rho[static_cast<size_t>(s)] = descend_pair(rho[static_cast<size_t>(s + 1)], m.layer(s + 1));

        // measure, then shift the physical couplings to zero expectation
        DensityPair rho0 = (T >= 1) ? descend_pair(rho[1], m.layer(1)) : rho_star;
        CouplingPair hphys{m.hamiltonian.hA, m.hamiltonian.hB};
        m.shiftA = mera_detail::tr_pair(rho0.rhoA, hphys.hA);
        m.shiftB = mera_detail::tr_pair(rho0.rhoB, hphys.hB);
        double energy = 0.5 * (m.shiftA + m.shiftB);

        rep.energy_trace.push_back(energy);
        if (have_prev && energy > prev_energy + 1e-10) rep.energy_monotone = false;
        if (have_prev && std::abs(energy - prev_energy) < sched.energy_tol) {
            rep.converged = true;
            rep.sweeps_run = sweep;
            break;
        }
        prev_energy = energy;
        have_prev = true;

        CouplingPair hcur = shifted_base_couplings(m);
        for (index_t ell = 1; ell <= T; ++ell) {
            const DensityPair& rc = rho[static_cast<size_t>(ell)];
            MeraLayer& L = m.transitional[static_cast<size_t>(ell - 1)];
            for (index_t it = 0; it < sched.inner_iterations; ++it) {
                if (L.fine_dim() > 1) {
                    DenseTensor gu = env_u(rc, hcur, L);
                    L.u = mera_detail::polar_update(gu, {2, 3}, {0, 1});
                }
                DenseTensor gw = env_w(rc, hcur, L);
                L.w = mera_detail::polar_update(gw, {0, 1}, {2});
            }
            hcur = ascend_pair(hcur, L);
        }

        // fixed layer sees the geometric pile of all higher scales
        for (index_t it = 0; it < sched.inner_iterations; ++it) {
            CouplingPair base = mera_detail::traceless_against(hcur, rho_star);
            CouplingPair hbar =
                mera_detail::scale_averaged_couplings(base, m.fixed_layer, sched.tail_terms);
            DenseTensor gu = env_u(rho_star, hbar, m.fixed_layer);
            m.fixed_layer.u = mera_detail::polar_update(gu, {2, 3}, {0, 1});
            DenseTensor gw = env_w(rho_star, hbar, m.fixed_layer);
            m.fixed_layer.w = mera_detail::polar_update(gw, {0, 1}, {2});
            rho_star = scale_invariant_density(m.fixed_layer);
        }
        rep.sweeps_run = sweep + 1;
    }

    m.energy_per_site = energy_per_site(m);
    m.convergence_residual = fixed_point_residual(m);
    rep.final_energy = m.energy_per_site;
    rep.residual = m.convergence_residual;
    if (!rep.energy_monotone)
        rep.warning = "energy increased beyond tolerance during at least one sweep";
    if (!rep.converged && rep.warning.empty())
        rep.warning = "sweep budget exhausted before energy change fell below tolerance";
    return rep;
}

/// Expectation-zeroing shift, exposed as an operation on the Hamiltonian.
inline TwoCouplingHamiltonian shift_to_zero_ground_energy(const TwoCouplingHamiltonian& H,
                                                          const ScaleInvariantMera& m,
                                                          double residual_threshold = 0.2) {
    detail::require(m.convergence_residual <= residual_threshold,
                    "shift_to_zero_ground_energy: state is not converged (residual " +
                        std::to_string(m.convergence_residual) + ")");
    auto rho = densities_by_scale(m, std::max<index_t>(m.depth(), 1));
    double eA = mera_detail::tr_pair(rho[0].rhoA, H.hA);
    double eB = mera_detail::tr_pair(rho[0].rhoB, H.hB);
    return shifted_couplings(H, eA, eB);
}

// ---------------------------------------------------------------------------
// Scaling dimensions from the cell channel of the fixed layer
// ---------------------------------------------------------------------------

/// The two-site cell (1,2) maps to the coarse cell through one u and two w's;
/// that channel is the scaling superoperator of this scheme. The identity is
/// always a fixed operator, so Delta_0 = 0 exactly; further dimensions come
/// from an Arnoldi iteration on the channel with the identity sector
/// projected out using the channel's fixed density.
inline std::vector<double> scaling_dimensions(const ScaleInvariantMera& m, index_t k) {
    const MeraLayer& L = m.fixed_layer;
    const index_t chi = L.coarse_dim();
    detail::require(k >= 1 && k <= chi * chi, "scaling_dimensions: k exceeds operator space bound");
    detail::require(L.fine_dim() == chi, "scaling_dimensions: fixed layer must be square");

    // fixed density of the cell channel's adjoint, for deflating the identity
    DenseTensor rho = mera_detail::maximally_mixed(chi).rhoA;
    for (index_t it = 0; it < 4000; ++it) {
        DenseTensor next = symmetrized(descend_center(rho, L));
        next *= 1.0 / mera_detail::tr_pair(next, mera_detail::identity_op(chi));
        double delta = (next - rho).max_abs();
        rho = next;
        if (delta < 1e-12) break;
    }
    DenseTensor id = mera_detail::identity_op(chi);

    auto apply = [&](const DenseTensor& x) {
        DenseTensor y = x;
        DenseTensor proj = id;
        proj *= mera_detail::tr_pair(rho, x);
        y -= proj;
        return symmetrized(ascend_center(y, L));
    };

    const index_t dim = chi * chi * chi * chi;
    const index_t m_kry = std::min<index_t>(dim, std::max<index_t>(40, 6 * k));
    std::vector<DenseTensor> basis;
    Rng rng(7, "scaling-dims");
    DenseTensor v0({chi, chi, chi, chi});
    for (index_t i = 0; i < v0.size(); ++i) v0[i] = rng.gaussian();
    v0 = symmetrized(v0);
    v0 *= 1.0 / v0.norm();
    basis.push_back(v0);

    Mat H = Mat::Zero(m_kry + 1, m_kry);
    index_t built = 0;
    for (index_t j = 0; j < m_kry; ++j) {
        DenseTensor wv = apply(basis[static_cast<size_t>(j)]);
        for (index_t i = 0; i <= j; ++i) {
            double hij = inner(basis[static_cast<size_t>(i)], wv);
            H(i, j) = hij;
            DenseTensor sub = basis[static_cast<size_t>(i)];
            sub *= hij;
            wv -= sub;
        }
        double nrm = wv.norm();
        H(j + 1, j) = nrm;
        built = j + 1;
        if (nrm < 1e-12) break;
        wv *= 1.0 / nrm;
        basis.push_back(wv);
    }

    Mat Hm = H.topLeftCorner(built, built);
    Eigen::EigenSolver<Mat> es(Hm);
    std::vector<double> lambdas;
    for (index_t i = 0; i < built; ++i) {
        std::complex<double> ev = es.eigenvalues()(i);
        if (std::abs(ev.imag()) < 1e-8 && ev.real() > 1e-6 && ev.real() < 1.0 + 1e-6)
            lambdas.push_back(ev.real());
    }
    std::sort(lambdas.begin(), lambdas.end(), std::greater<double>());

    std::vector<double> dims{0.0};  // identity sector, exact
    for (double lv : lambdas) {
        if (static_cast<index_t>(dims.size()) >= k) break;
        dims.push_back(-std::log2(lv));
    }
    return dims;
}

}  // namespace holomera
