"""Lowest hole eigenpairs and gauge-fixed Kramers doublets.

The sparse solve is ARPACK in shift-invert mode with a shift guaranteed to
sit below the hole spectrum (minimum over nodes of the smallest eigenvalue
of the local 6x6 potential + strain + Zeeman block; the kinetic form is
positive definite for valence parameters). States are normalized to
sum |psi|^2 dV = 1 and sorted by energy.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from .hamiltonian import SparseHamiltonian

DEGENERACY_THRESHOLD = 1e-9  # eV, Kramers pair grouping at B = 0


class EigensolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SpinorState:
    energy: float              # eV, hole convention (positive down)
    envelope: np.ndarray       # (N, 6) complex on mask nodes
    node_volume: float         # nm^3
    residual: float

    def density(self) -> np.ndarray:
        """Spinor-summed probability density per node, 1/nm^3."""
        return np.sum(np.abs(self.envelope) ** 2, axis=1)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.envelope) ** 2) * self.node_volume)

    def overlap(self, other: "SpinorState") -> complex:
        return complex(np.vdot(self.envelope, other.envelope) * self.node_volume)


@dataclass(frozen=True)
class KramersDoublet:
    lower: SpinorState
    upper: SpinorState

    def __post_init__(self):
        if abs(self.lower.overlap(self.upper)) > 1e-8:
            raise ValueError("doublet members are not mutually orthogonal")

    @property
    def states(self):
        return (self.lower, self.upper)

    @property
    def splitting(self) -> float:
        return self.upper.energy - self.lower.energy

    def envelopes(self) -> np.ndarray:
        return np.stack([self.lower.envelope, self.upper.envelope])


def _spectral_floor(h: SparseHamiltonian) -> float:
    """Lower bound on the spectrum: min over nodes of the local block minimum."""
    n = h.n_nodes
    diag_blocks = np.zeros((n, 6, 6), dtype=complex)
    m = h.matrix.tocoo()
    on_diag = (m.row // 6) == (m.col // 6)
    slots = m.row[on_diag] // 6
    a = m.row[on_diag] % 6
    b = m.col[on_diag] % 6
    np.add.at(diag_blocks, (slots, a, b), m.data[on_diag])
    # remove the kinetic diagonal contribution (positive definite part)
    d = np.array(h.grid.spacing())
    kin = sum(h.frame.kinetic[c, c] * (2.0 / d[c] ** 2) for c in range(3))
    diag_blocks -= kin[None, :, :]
    local_min = np.linalg.eigvalsh(diag_blocks)[:, 0].min()
    return float(local_min) - 1e-3


def lowest_states(h: SparseHamiltonian, k: int, tol: float = 1e-10,
                  sigma: float | None = None, seed: int = 0,
                  maxiter: int | None = None) -> list:
    """k lowest hole eigenpairs, orthonormal, residual-checked, sorted."""
    if k < 2:
        raise ValueError("request at least two states (one Kramers doublet)")
    n = h.dimension
    if k >= n - 1:
        raise ValueError("requested eigenpair count too close to the dimension")
    if sigma is None:
        sigma = _spectral_floor(h)
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n)
    try:
        vals, vecs = spla.eigsh(h.matrix, k=k, sigma=sigma, which="LM",
                                v0=v0, maxiter=maxiter)
    except spla.ArpackNoConvergence as exc:
        ritz = np.array2string(np.sort(exc.eigenvalues), precision=8)
        raise EigensolverError(
            f"eigensolver converged only {len(exc.eigenvalues)}/{k} pairs; "
            f"Ritz values so far: {ritz}") from exc
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]

    gram = vecs.conj().T @ vecs
    if np.abs(gram - np.eye(k)).max() > 1e-10:
        # re-orthonormalize within degenerate clusters
        qmat, _ = np.linalg.qr(vecs)
        vecs = qmat

    dv = h.grid.node_volume
    states = []
    for i in range(k):
        psi = vecs[:, i]
        res = float(np.linalg.norm(h.matrix @ psi - vals[i] * psi))
        if res > max(tol, 1e-12):
            raise EigensolverError(
                f"residual {res:.3e} above tolerance {tol:.1e} for state {i}")
        env = (psi / np.sqrt(dv)).reshape(h.n_nodes, 6)
        states.append(SpinorState(float(vals[i]), env, dv, res))
    return states


def ground_doublet(states, threshold: float = DEGENERACY_THRESHOLD,
                   require_degenerate: bool = False) -> KramersDoublet:
    if len(states) < 2:
        raise ValueError("need at least two states")
    if require_degenerate and states[1].energy - states[0].energy > threshold:
        raise ValueError("ground pair is split beyond the degeneracy threshold")
    return KramersDoublet(states[0], states[1])


def align_doublet(doublet: KramersDoublet, reference: KramersDoublet,
                  min_overlap: float = 0.1) -> KramersDoublet:
    """Rotate/phase a doublet in its 2D subspace to track a reference.

    Polar alignment: with overlap O_ab = <ref_a|psi_b>, the unitary V U* from
    the SVD O = U S V* maximizes Re tr(O T) and makes the aligned overlap
    Hermitian positive. Idempotent; rejects unrelated doublets.
    """
    dv = doublet.lower.node_volume
    ref = reference.envelopes()
    cur = doublet.envelopes()
    overlap = np.einsum("anb,cnb->ac", ref.conj(), cur) * dv
    u, s, vh = np.linalg.svd(overlap)
    if s.min() < min_overlap:
        raise ValueError(
            f"doublet overlap with reference is near-singular (s_min = {s.min():.3e})")
    t = vh.conj().T @ u.conj().T
    new = np.einsum("anb,aj->jnb", cur, t)
    lower = SpinorState(doublet.lower.energy, new[0], dv, doublet.lower.residual)
    upper = SpinorState(doublet.upper.energy, new[1], dv, doublet.upper.residual)
    return KramersDoublet(lower, upper)


def dense_eigenvalues(h: SparseHamiltonian) -> np.ndarray:
    """Full dense spectrum; cross-check for small masks only."""
    if h.dimension > 4000:
        warnings.warn("dense cross-check on a large operator")
    return np.linalg.eigvalsh(h.matrix.toarray())
