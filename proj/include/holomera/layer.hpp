#pragma once

// One coarse-graining layer of the modified binary MERA in d = 1.
//
// Local coordinates per layer, sites in Z:
//   - disentanglers u act on site pairs (4k+1, 4k+2),
//   - isometries w block pre-site pairs (2j, 2j+1) into coarse site j,
//   - coarse site j sits at local position j+1 of the next layer, so every
//     layer sees the same pattern and the canonical two-site cell {1,2}
//     (the one carrying a u) reproduces itself under coarse-graining.
//
// Couplings: h^A on even bonds [2m, 2m+1] (intra-block), h^B on odd bonds.
// A bare odd bond (4k+3, 4k+4) ascends through two w's only (disconnected
// channel); everything else passes through one u and two w's.
//
// Tensor storage (state-building direction, coarse -> fine):
//   w[f1, f2, c]       : coarse leg c emits fine pair (f1, f2)
//   u[o1, o2, i1, i2]  : pre-pair (i1, i2) -> fine pair (o1, o2)
//   operators          : [out1, out2, in1, in2]

#include <array>
#include <utility>
#include <vector>

#include "holomera/linalg.hpp"
#include "holomera/tensor.hpp"

namespace holomera {

struct MeraLayer {
    DenseTensor u;  // [fine1, fine2, pre1, pre2], square
    DenseTensor w;  // [fine1, fine2, coarse]

    index_t fine_dim() const { return w.dim(0); }
    index_t coarse_dim() const { return w.dim(2); }

    double isometry_defect() const {
        Isometry wi{w, {2}, {0, 1}};
        Isometry ui{u, {2, 3}, {0, 1}};
        return std::max(wi.isometry_defect(), ui.isometry_defect());
    }
};

struct CouplingPair {
    DenseTensor hA;
    DenseTensor hB;
};

struct DensityPair {
    DenseTensor rhoA;
    DenseTensor rhoB;
};

namespace layer_detail {

// transfer matrix of a w pair sharing its first leg: [f2_bra, c_bra, f2_ket, c_ket]
inline DenseTensor w_transfer_first(const DenseTensor& w) {
    return contract(w, w, {{0, 0}});
}
// shared second leg: [f1_bra, c_bra, f1_ket, c_ket]
inline DenseTensor w_transfer_second(const DenseTensor& w) {
    return contract(w, w, {{1, 1}});
}

}  // namespace layer_detail

/// Disconnected channel: h^B on a bare odd bond, flanked by two w's.
inline DenseTensor ascend_disconnected(const DenseTensor& op, const MeraLayer& L) {
    DenseTensor m1 = layer_detail::w_transfer_first(L.w);    // [p1o, c1o, p1i, c1i]
    DenseTensor m2 = layer_detail::w_transfer_second(L.w);   // [p2o, c2o, p2i, c2i]
    DenseTensor t1 = contract(m1, op, {{0, 0}, {2, 2}});     // [c1o, c1i, p2o, p2i]
    DenseTensor t2 = contract(t1, m2, {{2, 0}, {3, 2}});     // [c1o, c1i, c2o, c2i]
    return permute(t2, {0, 2, 1, 3});
}

/// Centre channel: h^B directly under a u.
inline DenseTensor ascend_center(const DenseTensor& op, const MeraLayer& L) {
    DenseTensor t1 = contract(op, L.u, {{2, 0}, {3, 1}});    // [p1o, p2o, q1i, q2i]
    DenseTensor d = contract(L.u, t1, {{0, 0}, {1, 1}});     // [q1o, q2o, q1i, q2i]
    DenseTensor m1 = layer_detail::w_transfer_first(L.w);
    DenseTensor m2 = layer_detail::w_transfer_second(L.w);
    DenseTensor t3 = contract(m1, d, {{0, 0}, {2, 2}});      // [c1o, c1i, q2o, q2i]
    DenseTensor t4 = contract(t3, m2, {{2, 0}, {3, 2}});     // [c1o, c1i, c2o, c2i]
    return permute(t4, {0, 2, 1, 3});
}

/// Left channel: h^A on the block left of the u.
inline DenseTensor ascend_left(const DenseTensor& op, const MeraLayer& L) {
    DenseTensor t1 = contract(op, L.u, {{3, 0}});            // [p0o, p1o, p0i, p2, q1i, q2i]
    DenseTensor t2 = contract(t1, L.u, {{1, 0}, {3, 1}});    // [p0o, p0i, q1i, q2i, q1o, q2o]
    DenseTensor t3 = contract(t2, L.w, {{1, 0}, {2, 1}});    // [p0o, q2i, q1o, q2o, c1i]
    DenseTensor t4 = contract(t3, L.w, {{0, 0}, {2, 1}});    // [q2i, q2o, c1i, c1o]
    DenseTensor m2 = layer_detail::w_transfer_second(L.w);   // [q2o', c2o, q2i', c2i]
    DenseTensor t5 = contract(t4, m2, {{0, 2}, {1, 0}});     // [c1i, c1o, c2o, c2i]
    return permute(t5, {1, 2, 0, 3});
}

/// Right channel: h^A on the block right of the u.
inline DenseTensor ascend_right(const DenseTensor& op, const MeraLayer& L) {
    DenseTensor t1 = contract(op, L.u, {{2, 1}});            // [p2o, p3o, p3i, p1, q1i, q2i]
    DenseTensor t2 = contract(t1, L.u, {{0, 1}, {3, 0}});    // [p3o, p3i, q1i, q2i, q1o, q2o]
    DenseTensor t3 = contract(t2, L.w, {{3, 0}, {1, 1}});    // [p3o, q1i, q1o, q2o, c2i]
    DenseTensor t4 = contract(t3, L.w, {{3, 0}, {0, 1}});    // [q1i, q1o, c2i, c2o]
    DenseTensor m1 = layer_detail::w_transfer_first(L.w);    // [q1o', c1o, q1i', c1i]
    DenseTensor t5 = contract(t4, m1, {{0, 2}, {1, 0}});     // [c2i, c2o, c1o, c1i]
    return permute(t5, {2, 1, 3, 0});
}

/// (h^A)' = disconnected channel of h^B.
inline DenseTensor ascend_A(const DenseTensor& hB, const MeraLayer& L) {
    return ascend_disconnected(hB, L);
}

/// (h^B)' = left(h^A) + centre(h^B) + right(h^A).
inline DenseTensor ascend_B(const DenseTensor& hA, const DenseTensor& hB, const MeraLayer& L) {
    DenseTensor out = ascend_left(hA, L);
    out += ascend_center(hB, L);
    out += ascend_right(hA, L);
    return out;
}

inline CouplingPair ascend_pair(const CouplingPair& h, const MeraLayer& L) {
    return CouplingPair{ascend_A(h.hB, L), ascend_B(h.hA, h.hB, L)};
}

// ---------------------------------------------------------------------------
// Descending channels (adjoints of the ascents in the trace pairing).
// Fine-lattice bond densities then come in four alignment flavours; the pair
// descent below averages them into one (rhoA, rhoB) per scale, which keeps
// the energy bookkeeping exact because both slots carry the same coupling.
// ---------------------------------------------------------------------------

/// Adjoint of ascend_disconnected.
inline DenseTensor descend_disconnected(const DenseTensor& rho, const MeraLayer& L) {
    DenseTensor m1 = layer_detail::w_transfer_first(L.w);
    DenseTensor m2 = layer_detail::w_transfer_second(L.w);
    DenseTensor t1 = contract(rho, m1, {{0, 3}, {2, 1}});    // [c2i, c2o, p1o, p1i]
    DenseTensor t2 = contract(t1, m2, {{0, 3}, {1, 1}});     // [p1o, p1i, p2o, p2i]
    return permute(t2, {1, 3, 0, 2});
}

/// Adjoint of ascend_center: descend through the w sandwich, then conjugate
/// the pre-pair density with u (direction flips on the adjoint side).
inline DenseTensor descend_center(const DenseTensor& rho, const MeraLayer& L) {
    DenseTensor rho_pre = descend_disconnected(rho, L);         // [q1k, q2k, q1b, q2b]
    DenseTensor e1 = contract(L.u, rho_pre, {{2, 0}, {3, 1}});  // [p1, p2, q1b, q2b]
    DenseTensor e2 = contract(e1, L.u, {{2, 2}, {3, 3}});       // [p1, p2, p1', p2']
    return e2;
}

/// Adjoint of ascend_left.
inline DenseTensor descend_left(const DenseTensor& rho, const MeraLayer& L) {
    DenseTensor m2 = layer_detail::w_transfer_second(L.w);   // [q2i*, c2i*, q2o*, c2o*] with (bra,ket) roles fixed below
    DenseTensor t1 = contract(rho, m2, {{1, 1}, {3, 3}});    // [c1i, c1o, q2i, q2o]
    DenseTensor t2 = contract(t1, L.w, {{0, 2}});            // [c1o, q2i, q2o, p0i, q1i]
    DenseTensor t3 = contract(t2, L.w, {{0, 2}});            // [q2i, q2o, p0i, q1i, p0o, q1o]
    DenseTensor t4 = contract(t3, L.u, {{3, 2}, {0, 3}});    // [q2o, p0i, p0o, q1o, p1, p2]
    DenseTensor t5 = contract(t4, L.u, {{3, 2}, {0, 3}, {5, 1}});  // [p0i, p0o, p1, p1o]
    return permute(t5, {0, 2, 1, 3});
}

/// Adjoint of ascend_right.
inline DenseTensor descend_right(const DenseTensor& rho, const MeraLayer& L) {
    DenseTensor m1 = layer_detail::w_transfer_first(L.w);
    DenseTensor t1 = contract(rho, m1, {{0, 1}, {2, 3}});    // [c2i, c2o, q1i, q1o]
    DenseTensor t2 = contract(t1, L.w, {{0, 2}});            // [c2o, q1i, q1o, q2i, p3i]
    DenseTensor t3 = contract(t2, L.w, {{0, 2}});            // [q1i, q1o, q2i, p3i, q2o, p3o]
    DenseTensor t4 = contract(t3, L.u, {{0, 2}, {2, 3}});    // [q1o, p3i, q2o, p3o, p1, p2]
    DenseTensor t5 = contract(t4, L.u, {{0, 2}, {2, 3}, {4, 0}});  // [p3i, p3o, p2, p2o]
    return permute(t5, {2, 0, 3, 1});
}

/// Alignment-averaged descent of a coarse density pair to the fine lattice.
inline DensityPair descend_pair(const DensityPair& rho, const MeraLayer& L) {
    DensityPair out;
    out.rhoA = descend_left(rho.rhoB, L);
    out.rhoA += descend_right(rho.rhoB, L);
    out.rhoA *= 0.5;
    out.rhoB = descend_center(rho.rhoB, L);
    out.rhoB += descend_disconnected(rho.rhoA, L);
    out.rhoB *= 0.5;
    return out;
}

// ---------------------------------------------------------------------------
// Environments: derivative of tr(rho' . channel(op)) with respect to one ket
// tensor, all other tensors held fixed. Used by the polar-update optimizer.
// Environments are paired entrywise with the tensor they replace.
// ---------------------------------------------------------------------------

/// d/du of tr(rho . center(op)).
inline DenseTensor env_u_center(const DenseTensor& rho, const DenseTensor& op, const MeraLayer& L) {
    DenseTensor rho_pre = descend_disconnected(rho, L);      // [q1i, q2i, q1o, q2o]
    DenseTensor g1 = contract(op, L.u, {{0, 0}, {1, 1}});    // [p1, p2, q1o, q2o]
    return contract(g1, rho_pre, {{2, 2}, {3, 3}});          // [p1, p2, q1i, q2i]
}

/// d/du of tr(rho . left(op)).
inline DenseTensor env_u_left(const DenseTensor& rho, const DenseTensor& op, const MeraLayer& L) {
    DenseTensor m2 = layer_detail::w_transfer_second(L.w);
    DenseTensor t1 = contract(rho, m2, {{1, 1}, {3, 3}});    // [c1i, c1o, q2i, q2o]
    DenseTensor t2 = contract(t1, L.w, {{0, 2}});            // [c1o, q2i, q2o, p0i, q1i]
    DenseTensor t3 = contract(t2, L.w, {{0, 2}});            // [q2i, q2o, p0i, q1i, p0o, q1o]
    DenseTensor a1 = contract(t3, op, {{2, 2}, {4, 0}});     // [q2i, q2o, q1i, q1o, p1o, p1]
    DenseTensor a2 = contract(a1, L.u, {{3, 2}, {1, 3}, {4, 0}});  // [q2i, q1i, p1, p2]
    return permute(a2, {2, 3, 1, 0});
}

/// d/du of tr(rho . right(op)).
inline DenseTensor env_u_right(const DenseTensor& rho, const DenseTensor& op, const MeraLayer& L) {
    DenseTensor m1 = layer_detail::w_transfer_first(L.w);
    DenseTensor t1 = contract(rho, m1, {{0, 1}, {2, 3}});    // [c2i, c2o, q1i, q1o]
    DenseTensor t2 = contract(t1, L.w, {{0, 2}});            // [c2o, q1i, q1o, q2i, p3i]
    DenseTensor t3 = contract(t2, L.w, {{0, 2}});            // [q1i, q1o, q2i, p3i, q2o, p3o]
    DenseTensor b1 = contract(t3, op, {{3, 3}, {5, 1}});     // [q1i, q1o, q2i, q2o, p2o, p2]
    DenseTensor b2 = contract(b1, L.u, {{1, 2}, {3, 3}, {4, 1}});  // [q1i, q2i, p2, p1]
    return permute(b2, {3, 2, 0, 1});
}

/// Total u environment for one coarse cell: centre(hB) + left(hA) + right(hA),
/// each weighted by the coarse bond density it feeds.
inline DenseTensor env_u(const DensityPair& rho, const CouplingPair& h, const MeraLayer& L) {
    DenseTensor g = env_u_center(rho.rhoB, h.hB, L);
    g += env_u_left(rho.rhoB, h.hA, L);
    g += env_u_right(rho.rhoB, h.hA, L);
    return g;
}

/// d/dw (left slot) of tr(rho . disconnected(op)).
inline DenseTensor env_w_disc_left(const DenseTensor& rho, const DenseTensor& op, const MeraLayer& L) {
    DenseTensor m2 = layer_detail::w_transfer_second(L.w);
    DenseTensor c1 = contract(rho, m2, {{1, 1}, {3, 3}});    // [c1i, c1o, p2i, p2o]
    DenseTensor c2 = contract(c1, op, {{2, 3}, {3, 1}});     // [c1i, c1o, p1o, p1i]
    DenseTensor c3 = contract(c2, L.w, {{1, 2}, {2, 1}});    // [c1i, p1i, f2]
    return permute(c3, {2, 1, 0});
}

/// d/dw (right slot) of tr(rho . disconnected(op)).
inline DenseTensor env_w_disc_right(const DenseTensor& rho, const DenseTensor& op, const MeraLayer& L) {
    DenseTensor m1 = layer_detail::w_transfer_first(L.w);
    DenseTensor d1 = contract(rho, m1, {{0, 1}, {2, 3}});    // [c2i, c2o, p1i, p1o]
    DenseTensor d2 = contract(d1, op, {{2, 2}, {3, 0}});     // [c2i, c2o, p2o, p2i]
    DenseTensor d3 = contract(d2, L.w, {{1, 2}, {2, 0}});    // [c2i, p2i, f5]
    return permute(d3, {1, 2, 0});
}

/// d/dw of tr(rho . center(op)) summed over both w slots; the centre channel
/// sees the u-dressed operator through the same two-w sandwich as the
/// disconnected one.
inline DenseTensor env_w_center(const DenseTensor& rho, const DenseTensor& op, const MeraLayer& L) {
    DenseTensor t1 = contract(op, L.u, {{2, 0}, {3, 1}});
    DenseTensor d = contract(L.u, t1, {{0, 0}, {1, 1}});     // dressed op on the pre-pair
    DenseTensor g = env_w_disc_left(rho, d, L);
    g += env_w_disc_right(rho, d, L);
    return g;
}

/// d/dw of tr(rho . left(op)) summed over both w slots.
inline DenseTensor env_w_left(const DenseTensor& rho, const DenseTensor& op, const MeraLayer& L) {
    DenseTensor m2 = layer_detail::w_transfer_second(L.w);
    DenseTensor t1 = contract(rho, m2, {{1, 1}, {3, 3}});    // [c1i, c1o, q2i, q2o]
    // left-block slot
    DenseTensor e1 = contract(t1, L.w, {{1, 2}});            // [c1i, q2i, q2o, p0o, q1o]
    DenseTensor e2 = contract(e1, op, {{3, 0}});             // [c1i, q2i, q2o, q1o, p1o, p0i, p1]
    DenseTensor e3 = contract(e2, L.u, {{3, 2}, {2, 3}, {4, 0}});  // [c1i, q2i, p0i, p1, p2]
    DenseTensor e4 = contract(e3, L.u, {{3, 0}, {4, 1}, {1, 3}});  // [c1i, p0i, q1i]
    DenseTensor g = permute(e4, {1, 2, 0});
    // right-block (spectator) slot
    DenseTensor f1 = contract(rho, L.w, {{3, 2}});           // [c1i, c2i, c1o, q2o, f3]
    DenseTensor f2 = contract(f1, L.w, {{2, 2}});            // [c1i, c2i, q2o, f3, p0o, q1o]
    DenseTensor f3t = contract(f2, op, {{4, 0}});            // [c1i, c2i, q2o, f3, q1o, p1o, p0i, p1]
    DenseTensor f4 = contract(f3t, L.u, {{4, 2}, {2, 3}, {5, 0}});  // [c1i, c2i, f3, p0i, p1, p2]
    DenseTensor f5 = contract(f4, L.w, {{3, 0}, {0, 2}});    // [c2i, f3, p1, p2, q1i]
    DenseTensor f6 = contract(f5, L.u, {{2, 0}, {3, 1}, {4, 2}});  // [c2i, f3, q2i]
    g += permute(f6, {2, 1, 0});
    return g;
}

/// d/dw of tr(rho . right(op)) summed over both w slots.
inline DenseTensor env_w_right(const DenseTensor& rho, const DenseTensor& op, const MeraLayer& L) {
    DenseTensor m1 = layer_detail::w_transfer_first(L.w);
    DenseTensor t1 = contract(rho, m1, {{0, 1}, {2, 3}});    // [c2i, c2o, q1i, q1o]
    // right-block slot
    DenseTensor g1 = contract(t1, L.w, {{1, 2}});            // [c2i, q1i, q1o, q2o, p3o]
    DenseTensor g2 = contract(g1, op, {{4, 1}});             // [c2i, q1i, q1o, q2o, p2o, p2, p3i]
    DenseTensor g3 = contract(g2, L.u, {{2, 2}, {3, 3}, {4, 1}});  // [c2i, q1i, p2, p3i, p1]
    DenseTensor g4 = contract(g3, L.u, {{4, 0}, {2, 1}, {1, 2}});  // [c2i, p3i, q2i]
    DenseTensor g = permute(g4, {2, 1, 0});
    // left-block (spectator) slot
    DenseTensor h1 = contract(rho, L.w, {{2, 2}});           // [c1i, c2i, c2o, f0, q1o]
    DenseTensor h2 = contract(h1, L.w, {{2, 2}});            // [c1i, c2i, f0, q1o, q2o, p3o]
    DenseTensor h3 = contract(h2, op, {{5, 1}});             // [c1i, c2i, f0, q1o, q2o, p2o, p2, p3i]
    DenseTensor h4 = contract(h3, L.u, {{3, 2}, {4, 3}, {5, 1}});  // [c1i, c2i, f0, p2, p3i, p1]
    DenseTensor h5 = contract(h4, L.w, {{4, 1}, {1, 2}});    // [c1i, f0, p2, p1, q2i]
    DenseTensor h6 = contract(h5, L.u, {{3, 0}, {2, 1}, {4, 3}});  // [c1i, f0, q1i]
    g += permute(h6, {1, 2, 0});
    return g;
}

/// Total w environment for one coarse cell.
inline DenseTensor env_w(const DensityPair& rho, const CouplingPair& h, const MeraLayer& L) {
    DenseTensor g = env_w_disc_left(rho.rhoA, h.hB, L);
    g += env_w_disc_right(rho.rhoA, h.hB, L);
    g += env_w_center(rho.rhoB, h.hB, L);
    g += env_w_left(rho.rhoB, h.hA, L);
    g += env_w_right(rho.rhoB, h.hA, L);
    return g;
}

/// Scalar objective the environments differentiate: per-cell energy at the
/// coarse scale, tr(rhoA . A(hB)) + tr(rhoB . [L+C+R](hA,hB)).
inline double cell_energy(const DensityPair& rho, const CouplingPair& h, const MeraLayer& L) {
    CouplingPair up = ascend_pair(h, L);
    auto tr_pair = [](const DenseTensor& r, const DenseTensor& o) {
        // tr(r o) with both stored [out,in]: sum r[a,b] o[b,a]
        DenseTensor t = contract(r, o, {{0, 2}, {1, 3}, {2, 0}, {3, 1}});
        return t[0];
    };
    return tr_pair(rho.rhoA, up.hA) + tr_pair(rho.rhoB, up.hB);
}

// ---------------------------------------------------------------------------
// Positioned single-term ascent, used to coarse-grain Hamiltonian shells onto
// the Wilson chain of the canonical cell {1,2}.
// ---------------------------------------------------------------------------

struct PositionedTerm {
    index_t pos;     // bond [pos, pos+1] in the current layer's local coordinates
    DenseTensor op;  // [o1 o2 i1 i2]
};

inline index_t mod4(index_t p) { return ((p % 4) + 4) % 4; }

/// Bulk ascent of one two-site term through a layer; returns the term at its
/// coarse position in the next layer's local coordinates.
inline PositionedTerm ascend_term_bulk(const PositionedTerm& t, const MeraLayer& L) {
    index_t phi = mod4(t.pos);
    DenseTensor op;
    index_t coarse_pos = 0;
    switch (phi) {
        case 0:  // intra-block, block left of the u
            op = ascend_left(t.op, L);
            coarse_pos = t.pos / 2;
            break;
        case 1:  // under the u
            op = ascend_center(t.op, L);
            coarse_pos = (t.pos - 1) / 2;
            break;
        case 2:  // intra-block, block right of the u
            op = ascend_right(t.op, L);
            coarse_pos = t.pos / 2 - 1;
            break;
        default:  // bare odd bond
            op = ascend_disconnected(t.op, L);
            coarse_pos = (t.pos - 1) / 2;
            break;
    }
    return PositionedTerm{coarse_pos + 1, std::move(op)};
}

/// Cone-interface ascent of the term at the right K1 slot, bond [3,4]: only
/// the exterior w is contracted; the raw site-3 leg and the new coarse leg
/// become Wilson-chain legs. Output [raw_o, coarse_o, raw_i, coarse_i].
inline DenseTensor ascend_term_interface_right(const DenseTensor& op, const MeraLayer& L) {
    DenseTensor m2 = layer_detail::w_transfer_second(L.w);   // [p2i, c2i, p2o, c2o] roles below
    DenseTensor r = contract(op, m2, {{3, 0}, {1, 2}});      // [p1o, p1i, c2i, c2o]
    return permute(r, {0, 3, 1, 2});
}

/// Mirror interface at the left K1 slot, bond [-1, 0].
/// Output [coarse_o, raw_o, coarse_i, raw_i].
inline DenseTensor ascend_term_interface_left(const DenseTensor& op, const MeraLayer& L) {
    DenseTensor m1 = layer_detail::w_transfer_first(L.w);    // [s(-1)_ket, c_ket, s(-1)_bra, c_bra]
    DenseTensor r = contract(op, m1, {{2, 0}, {0, 2}});      // [s0_o, s0_i, c_ket(i), c_bra(o)]
    return permute(r, {3, 0, 2, 1});
}

constexpr index_t kRightInterfacePos = 3;   // bond [3,4]
constexpr index_t kLeftInterfacePos = -1;   // bond [-1,0]

}  // namespace holomera
