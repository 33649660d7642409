"""Sparse six-band finite-difference Hamiltonian on the channel mask.

Second derivatives use the standard three-point stencil, mixed k_i k_j terms
the four-point cross stencil, both restricted to mask nodes (hard walls:
the envelope is zero outside the mask). Magnetic neighbor couplings follow
the linear-in-B Peierls expansion with bond-midpoint coefficients, which is
the discretization of the symmetrized operator ordering and keeps the matrix
Hermitian. All per-node 6x6 blocks come from the AssemblyFrame, so strain,
Zeeman, and vector-potential pieces share one basis convention.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .bands import AssemblyFrame, pikus_bir_scalars, zeeman_block
from .constants import CONSTANTS
from .geometry import Grid


@dataclass(frozen=True)
class MagneticFieldSpec:
    b: tuple                 # tesla
    gauge_origin: tuple = (0.0, 0.0, 0.0)   # nm

    @property
    def magnitude(self):
        return float(np.linalg.norm(self.b))


@dataclass(frozen=True)
class PikusBirTerms:
    """Deformation terms per channel node (eV); P, Q real, R, S complex."""
    P: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    S: np.ndarray


@dataclass(frozen=True)
class SparseHamiltonian:
    matrix: sp.csr_matrix
    grid: Grid
    mask: np.ndarray           # (nx, ny, nz) bool, Schrodinger domain
    nodes: np.ndarray          # (N, 3) int indices of mask nodes
    frame: AssemblyFrame

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_error(self) -> float:
        d = self.matrix - self.matrix.getH()
        scale = np.abs(self.matrix.data).max() if self.matrix.nnz else 1.0
        return np.abs(d.data).max() / scale if d.nnz else 0.0

    def node_coordinates(self) -> np.ndarray:
        """(N, 3) node positions in nm."""
        origin = np.asarray(self.grid.origin)
        spacing = np.array(self.grid.spacing())
        return origin + self.nodes * spacing

    def with_matrix(self, matrix) -> "SparseHamiltonian":
        return replace(self, matrix=matrix.tocsr())

    def dump_triplets(self, path) -> None:
        coo = self.matrix.tocoo()
        with open(path, "w") as fh:
            fh.write("# row col real imag\n")
            for r, c, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{r} {c} {v.real:.17e} {v.imag:.17e}\n")


def _mask_nodes(mask: np.ndarray):
    nodes = np.argwhere(mask)
    slot = np.full(mask.shape, -1, dtype=np.int64)
    slot[mask] = np.arange(nodes.shape[0])
    return nodes, slot


def _emit_block(rows, cols, vals, r_slots, c_slots, block, scale=None):
    """Append COO entries for a 6x6 block over many (row, col) node pairs.

    ``scale`` optionally multiplies the block per pair (per-bond coefficient).
    """
    a, b = np.nonzero(np.abs(block) > 0)
    if a.size == 0:
        return
    rows.append((r_slots[:, None] * 6 + a[None, :]).ravel())
    cols.append((c_slots[:, None] * 6 + b[None, :]).ravel())
    entries = block[a, b]
    if scale is None:
        vals.append(np.broadcast_to(entries, (r_slots.size, a.size)).ravel().astype(complex))
    else:
        vals.append((scale[:, None] * entries[None, :]).ravel())


def _emit_per_node(rows, cols, vals, slots, blocks):
    """Append COO entries for per-node 6x6 diagonal blocks, shape (N, 6, 6)."""
    nz = np.abs(blocks).max(axis=0) > 0
    a, b = np.nonzero(nz)
    if a.size == 0:
        return
    rows.append((slots[:, None] * 6 + a[None, :]).ravel())
    cols.append((slots[:, None] * 6 + b[None, :]).ravel())
    vals.append(blocks[:, a, b].ravel())


def _neighbor_bonds(nodes, slot, offset):
    """Bond arrays (row slots, col slots, row node index) for one offset."""
    shape = slot.shape
    nb = nodes + offset
    ok = np.all((nb >= 0) & (nb < shape), axis=1)
    nb_slot = np.full(nodes.shape[0], -1, dtype=np.int64)
    nb_slot[ok] = slot[nb[ok, 0], nb[ok, 1], nb[ok, 2]]
    ok &= nb_slot >= 0
    idx = np.nonzero(ok)[0]
    return idx, nb_slot[idx]


def _finalize(rows, cols, vals, n):
    m = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(6 * n, 6 * n), dtype=complex)
    return m.tocsr()


def assemble_lk(grid: Grid, mask: np.ndarray, frame: AssemblyFrame,
                potential: Optional[np.ndarray] = None) -> SparseHamiltonian:
    """Kinetic + split-off + electrostatic part of the hole Hamiltonian.

    ``potential`` is the electrostatic potential on the full grid (V); the
    diagonal receives -e*phi in the hole convention. Hard-wall boundaries
    are implied by the mask.
    """
    if not np.any(mask):
        raise ValueError("Schrodinger mask is empty")
    nodes, slot = _mask_nodes(mask)
    n = nodes.shape[0]
    d = np.array(grid.spacing())
    rows, cols, vals = [], [], []

    diag = frame.so_matrix.astype(complex).copy()
    for c in range(3):
        diag += frame.kinetic[c, c] * (2.0 / d[c] ** 2)
    all_slots = np.arange(n)
    _emit_block(rows, cols, vals, all_slots, all_slots, diag)

    if potential is not None:
        u = -potential[mask]  # eV per volt for charge +e holes
        eye = np.nonzero(np.eye(6))
        rows.append((all_slots[:, None] * 6 + eye[0][None, :]).ravel())
        cols.append((all_slots[:, None] * 6 + eye[1][None, :]).ravel())
        vals.append(np.repeat(u, 6).astype(complex))

    offsets = np.eye(3, dtype=int)
    for c in range(3):
        block = -frame.kinetic[c, c] / d[c] ** 2
        for s in (1, -1):
            idx, nb = _neighbor_bonds(nodes, slot, s * offsets[c])
            _emit_block(rows, cols, vals, idx, nb, block)
    for c in range(3):
        for e in range(c + 1, 3):
            base = -frame.kinetic[c, e] / (2.0 * d[c] * d[e])
            for s1 in (1, -1):
                for s2 in (1, -1):
                    off = s1 * offsets[c] + s2 * offsets[e]
                    idx, nb = _neighbor_bonds(nodes, slot, off)
                    _emit_block(rows, cols, vals, idx, nb, base * (s1 * s2))

    return SparseHamiltonian(_finalize(rows, cols, vals, n), grid, mask, nodes, frame)


def pikus_bir_terms(strain, av: float, b: float, d: float,
                    mask: Optional[np.ndarray] = None) -> PikusBirTerms:
    """Evaluate the deformation terms node-wise from a strain field.

    ``strain`` provides exx..eyz arrays (full grid) or a 6-tuple of arrays;
    ``mask`` restricts to channel nodes when given.
    """
    comps = strain.components() if hasattr(strain, "components") else strain
    if mask is not None:
        comps = tuple(c[mask] for c in comps)
    P, Q, R, S = pikus_bir_scalars(comps, av, b, d)
    return PikusBirTerms(np.asarray(P), np.asarray(Q),
                         np.asarray(R, dtype=complex), np.asarray(S, dtype=complex))


def _pb_structure(frame: AssemblyFrame):
    """Structure matrices G such that the strain block is
    P G_P + Q G_Q + Re(R) G_Rr + Im(R) G_Ri + Re(S) G_Sr + Im(S) G_Si.

    Derived from the frame's unrotated deformation blocks with probe strains;
    valid for the identity frame where P, Q, R, S are defined.
    """
    from .bands import deformation_tensor, coefficient_blocks

    def block_for(av, b, d, eps6):
        blocks = coefficient_blocks(deformation_tensor(av, b, d))
        from .bands import strain6_to_tensor
        return np.einsum("cdij,cd->ij", blocks, strain6_to_tensor(eps6))

    s3 = np.sqrt(3.0)
    return (
        block_for(1, 0, 0, (1 / 3, 1 / 3, 1 / 3, 0, 0, 0)),      # P
        block_for(0, 1, 0, (0, 0, 1, 0, 0, 0)),                  # Q
        block_for(0, 1, 0, (1 / s3, -1 / s3, 0, 0, 0, 0)),       # Re R
        block_for(0, 0, 1, (0, 0, 0, -1, 0, 0)),                 # Im R
        block_for(0, 0, 1, (0, 0, 0, 0, -1, 0)),                 # Re S
        block_for(0, 0, 1, (0, 0, 0, 0, 0, 1)),                  # Im S
    )


_PB_STRUCTURE_CACHE = None


def strain_blocks_from_terms(pb: PikusBirTerms) -> np.ndarray:
    """Per-node 6x6 deformation blocks from named terms (identity frame)."""
    global _PB_STRUCTURE_CACHE
    if _PB_STRUCTURE_CACHE is None:
        from .bands import KpParameters, identity_frame
        probe = identity_frame(KpParameters(1, 0, 0, 0, 0))
        _PB_STRUCTURE_CACHE = _pb_structure(probe)
    gp, gq, grr, gri, gsr, gsi = _PB_STRUCTURE_CACHE
    parts = (
        np.einsum("n,ij->nij", pb.P, gp),
        np.einsum("n,ij->nij", pb.Q, gq),
        np.einsum("n,ij->nij", pb.R.real, grr),
        np.einsum("n,ij->nij", pb.R.imag, gri),
        np.einsum("n,ij->nij", pb.S.real, gsr),
        np.einsum("n,ij->nij", pb.S.imag, gsi),
    )
    return sum(parts)


def strain_blocks_from_field(frame: AssemblyFrame, strain, mask) -> np.ndarray:
    """Per-node strain blocks via the frame tensor; valid in rotated frames."""
    comps = strain.components() if hasattr(strain, "components") else strain
    exx, eyy, ezz, exy, exz, eyz = (np.asarray(c[mask]) for c in comps)
    eps = np.empty((exx.size, 3, 3))
    eps[:, 0, 0], eps[:, 1, 1], eps[:, 2, 2] = exx, eyy, ezz
    eps[:, 0, 1] = eps[:, 1, 0] = exy
    eps[:, 0, 2] = eps[:, 2, 0] = exz
    eps[:, 1, 2] = eps[:, 2, 1] = eyz
    return np.einsum("cdij,ncd->nij", frame.strain, eps)


def add_strain(h: SparseHamiltonian, pb: PikusBirTerms) -> SparseHamiltonian:
    """Add deformation blocks built from named P, Q, R, S terms per node."""
    if pb.P.shape[0] != h.n_nodes:
        raise ValueError("strain terms do not match the Hamiltonian node count")
    blocks = strain_blocks_from_terms(pb)
    rows, cols, vals = [], [], []
    _emit_per_node(rows, cols, vals, np.arange(h.n_nodes), blocks)
    if not rows:
        return h
    return h.with_matrix(h.matrix + _finalize(rows, cols, vals, h.n_nodes))


def add_strain_field(h: SparseHamiltonian, strain) -> SparseHamiltonian:
    """Add deformation blocks from a sampled strain field (any frame)."""
    blocks = strain_blocks_from_field(h.frame, strain, h.mask)
    rows, cols, vals = [], [], []
    _emit_per_node(rows, cols, vals, np.arange(h.n_nodes), blocks)
    if not rows:
        return h
    return h.with_matrix(h.matrix + _finalize(rows, cols, vals, h.n_nodes))


def add_zeeman(h: SparseHamiltonian, bspec: MagneticFieldSpec,
               kappa: Optional[float] = None) -> SparseHamiltonian:
    """Add 2 kappa muB J.B on every node's diagonal block."""
    if not np.any(np.asarray(bspec.b)):
        return h
    frame = h.frame if kappa is None else replace(
        h.frame, params=replace(h.frame.params, kappa=kappa))
    block = zeeman_block(frame, bspec.b)
    n = h.n_nodes
    rows, cols, vals = [], [], []
    _emit_block(rows, cols, vals, np.arange(n), np.arange(n), block)
    return h.with_matrix(h.matrix + _finalize(rows, cols, vals, n))


def vector_potential_matrix(h: SparseHamiltonian, bspec: MagneticFieldSpec) -> sp.csr_matrix:
    """Linear-in-B neighbor couplings from the gauge A = -(Bz y, 0, By x - Bx y).

    Bond coefficients are evaluated at bond midpoints measured from the gauge
    origin; hop along +c carries -i/d_c * sum_d A[c,d] a_d(mid).
    """
    bx, by, bz = bspec.b
    origin = np.asarray(bspec.gauge_origin, dtype=float)
    coords = h.node_coordinates() - origin
    d = np.array(h.grid.spacing())
    t1 = CONSTANTS.e_over_hbar
    nodes, slot = h.nodes, np.full(h.mask.shape, -1, dtype=np.int64)
    slot[h.mask] = np.arange(h.n_nodes)
    offsets = np.eye(3, dtype=int)
    rows, cols, vals = [], [], []

    def gauge_a(r):
        # (e/hbar) * A in 1/nm
        return np.stack([-t1 * bz * r[:, 1],
                         np.zeros(r.shape[0]),
                         -t1 * (by * r[:, 0] - bx * r[:, 1])], axis=1)

    for c in range(3):
        for s in (1, -1):
            idx, nb = _neighbor_bonds(nodes, slot, s * offsets[c])
            if idx.size == 0:
                continue
            mid = coords[idx].copy()
            mid[:, c] += 0.5 * s * d[c]
            a = gauge_a(mid)
            for dd in range(3):
                scale = (-1j * s / d[c]) * a[:, dd]
                if not np.any(scale):
                    continue
                _emit_block(rows, cols, vals, idx, nb, h.frame.kinetic[c, dd],
                            scale=scale)
    if not rows:
        return sp.csr_matrix((h.dimension, h.dimension), dtype=complex)
    return _finalize(rows, cols, vals, h.n_nodes)


def add_vector_potential(h: SparseHamiltonian, bspec: MagneticFieldSpec) -> SparseHamiltonian:
    if not np.any(np.asarray(bspec.b)):
        return h
    return h.with_matrix(h.matrix + vector_potential_matrix(h, bspec))


def magnetic_matrix(h: SparseHamiltonian, bspec: MagneticFieldSpec) -> sp.csr_matrix:
    """Full linear magnetic operator (Zeeman + vector potential) at field B."""
    n = h.n_nodes
    rows, cols, vals = [], [], []
    _emit_block(rows, cols, vals, np.arange(n), np.arange(n),
                zeeman_block(h.frame, bspec.b))
    zee = _finalize(rows, cols, vals, n)
    return zee + vector_potential_matrix(h, bspec)


def build_hamiltonian(grid: Grid, mask: np.ndarray, frame: AssemblyFrame,
                      potential: Optional[np.ndarray] = None,
                      strain=None, bspec: Optional[MagneticFieldSpec] = None,
                      check_hermitian: bool = True) -> SparseHamiltonian:
    """One-call assembly of the full operator used by the SCF loop."""
    h = assemble_lk(grid, mask, frame, potential)
    if strain is not None:
        h = add_strain_field(h, strain)
    if bspec is not None and np.any(np.asarray(bspec.b)):
        h = h.with_matrix(h.matrix + magnetic_matrix(h, bspec))
    if check_hermitian and h.hermiticity_error() > 1e-13:
        raise AssertionError(f"assembled operator lost Hermiticity: "
                             f"{h.hermiticity_error():.3e}")
    return h
