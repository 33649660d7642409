"""Six-band valence Hamiltonian building blocks.

Spin-orbit basis ordering (columns of the transformation U):

    |3/2,+3/2>, |3/2,+1/2>, |3/2,-1/2>, |3/2,-3/2>, |1/2,+1/2>, |1/2,-1/2>

constructed from the orbital basis {X up, Y up, Z up, X down, Y down, Z down}
with Condon-Shortley phases. All operators are expressed in the hole picture:
energies grow downward from the valence-band edge, so confinement energies
are positive and the qubit ground state is the lowest eigenvalue. The
electrostatic diagonal is -e*phi in this convention (a more positive gate
attracts the hole). HOLE_ENERGIES_POSITIVE_DOWN records the choice.

The quadratic form of the Hamiltonian is carried as a rank-4 coefficient
tensor over (orbital, orbital, k, k); crystal rotations act on all four
indices, which keeps kinetic, strain, and vector-potential terms mutually
consistent in any frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS
from .materials import MaterialRecord

HOLE_ENERGIES_POSITIVE_DOWN = True

BASIS_LABELS = ("HH+", "LH+", "LH-", "HH-", "SO+", "SO-")
DKK_LABELS = ("X up", "Y up", "Z up", "X down", "Y down", "Z down")


@dataclass(frozen=True)
class KpParameters:
    gamma1: float
    gamma2: float
    gamma3: float
    kappa: float
    delta0: float  # eV

    @classmethod
    def from_material(cls, mat: MaterialRecord) -> "KpParameters":
        return cls(mat.gamma1, mat.gamma2, mat.gamma3, mat.kappa, mat.delta0_SO)

    # orbital-basis coefficients, eV nm^2
    @property
    def L_param(self) -> float:
        return CONSTANTS.hbar2_over_2m0 * (self.gamma1 + 4.0 * self.gamma2)

    @property
    def M_param(self) -> float:
        return CONSTANTS.hbar2_over_2m0 * (self.gamma1 - 2.0 * self.gamma2)

    @property
    def N_param(self) -> float:
        return CONSTANTS.hbar2_over_2m0 * 6.0 * self.gamma3


def orbital_angular_momentum():
    """L_a matrices on {X, Y, Z}: (L_a)_bc = -i eps_abc."""
    eps = np.zeros((3, 3, 3))
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[a, b, c] = 1.0
        eps[a, c, b] = -1.0
    return -1j * eps


PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


def _build_so_to_dkk():
    s2, s3, s6 = np.sqrt(2.0), np.sqrt(3.0), np.sqrt(6.0)
    cols = np.zeros((6, 6), dtype=complex)
    # entries are coefficients on (X+, Y+, Z+, X-, Y-, Z-)
    cols[:, 0] = [-1 / s2, -1j / s2, 0, 0, 0, 0]
    cols[:, 1] = [0, 0, 2 / s6, -1 / s6, -1j / s6, 0]
    cols[:, 2] = [1 / s6, -1j / s6, 0, 0, 0, 2 / s6]
    cols[:, 3] = [0, 0, 0, 1 / s2, -1j / s2, 0]
    cols[:, 4] = [0, 0, -1 / s3, -1 / s3, -1j / s3, 0]
    cols[:, 5] = [-1 / s3, 1j / s3, 0, 0, 0, 1 / s3]
    return cols


#: columns = spin-orbit states expressed in the DKK orbital basis
U_SO = _build_so_to_dkk()


def to_so_basis(block_dkk: np.ndarray) -> np.ndarray:
    return U_SO.conj().T @ block_dkk @ U_SO


def spin_orbit_matrix(delta0: float) -> np.ndarray:
    """Split-off coupling in the spin-orbit basis: diag(0,0,0,0,D,D) hole energies."""
    L = orbital_angular_momentum()
    h = sum(np.kron(PAULI[a], L[a]) for a in range(3))
    return to_so_basis((delta0 / 3.0) * (np.eye(6) - h))


def total_j_matrices() -> np.ndarray:
    """J_x, J_y, J_z in the spin-orbit basis (block diagonal 3/2 and 1/2)."""
    L = orbital_angular_momentum()
    out = np.empty((3, 6, 6), dtype=complex)
    for a in range(3):
        j_dkk = np.kron(np.eye(2), L[a]) + np.kron(0.5 * PAULI[a], np.eye(3))
        out[a] = to_so_basis(j_dkk)
    return out


def _cubic_tensor(l: float, m: float, n: float) -> np.ndarray:
    """Rank-4 coefficient tensor T[a,b,c,d]: H_ab = sum_cd T[a,b,c,d] q_c q_d
    for a symmetric argument q_c q_d (momentum products or strain)."""
    T = np.zeros((3, 3, 3, 3))
    for a in range(3):
        for c in range(3):
            T[a, a, c, c] = l if c == a else m
    for a in range(3):
        for b in range(3):
            if a != b:
                T[a, b, a, b] = n / 2.0
                T[a, b, b, a] = n / 2.0
    return T


def kinetic_tensor(params: KpParameters) -> np.ndarray:
    return _cubic_tensor(params.L_param, params.M_param, params.N_param)


def deformation_tensor(av: float, b: float, d: float) -> np.ndarray:
    # orbital-basis deformation constants giving the standard P,Q,R,S terms
    return _cubic_tensor(av - 2.0 * b, av + b, -np.sqrt(3.0) * d)


def rotate_tensor4(T: np.ndarray, axes: np.ndarray) -> np.ndarray:
    R = np.asarray(axes, dtype=float)
    return np.einsum("ae,bf,cg,dh,efgh->abcd", R, R, R, R, T)


def check_axes(axes) -> np.ndarray:
    R = np.asarray(axes, dtype=float)
    if R.shape != (3, 3) or not np.allclose(R @ R.T, np.eye(3), atol=1e-10):
        raise ValueError("crystal axes must be a 3x3 orthonormal matrix")
    if np.linalg.det(R) < 0:
        raise ValueError("crystal axes must form a right-handed triple")
    return R


def coefficient_blocks(T: np.ndarray) -> np.ndarray:
    """Spin-orbit-basis 6x6 coefficient blocks A[c,d] from an orbital tensor."""
    blocks = np.empty((3, 3, 6, 6), dtype=complex)
    for c in range(3):
        for d in range(3):
            blocks[c, d] = to_so_basis(np.kron(np.eye(2), T[:, :, c, d]))
    return blocks


@dataclass(frozen=True)
class AssemblyFrame:
    """Frame-resolved coefficient blocks consumed by the sparse assembler.

    kinetic[c,d] and strain[c,d] are 6x6 blocks contracted with k_c k_d and
    eps_cd respectively; so_matrix carries the split-off energy; j_matrices
    feed the Zeeman term. Built by identity_frame/rotated_frame.
    """
    params: KpParameters
    axes: np.ndarray
    kinetic: np.ndarray
    strain: np.ndarray
    so_matrix: np.ndarray
    j_matrices: np.ndarray
    stiffness: np.ndarray | None = None


def identity_frame(params: KpParameters, deformation=(0.0, 0.0, 0.0)) -> AssemblyFrame:
    av, b, d = deformation
    return AssemblyFrame(
        params=params, axes=np.eye(3),
        kinetic=coefficient_blocks(kinetic_tensor(params)),
        strain=coefficient_blocks(deformation_tensor(av, b, d)),
        so_matrix=spin_orbit_matrix(params.delta0),
        j_matrices=total_j_matrices(),
    )


def rotated_frame(params: KpParameters, axes, deformation=(0.0, 0.0, 0.0),
                  stiffness: np.ndarray | None = None) -> AssemblyFrame:
    """Assembly inputs for device axes given as crystal directions (rows).

    The kinetic and deformation tensors are rotated on all indices; the
    split-off and Zeeman terms are rotation invariant. A user-supplied
    engineering-Voigt stiffness matrix is rotated alongside when present.
    """
    R = check_axes(axes)
    av, b, d = deformation
    return AssemblyFrame(
        params=params, axes=R,
        kinetic=coefficient_blocks(rotate_tensor4(kinetic_tensor(params), R)),
        strain=coefficient_blocks(rotate_tensor4(deformation_tensor(av, b, d), R)),
        so_matrix=spin_orbit_matrix(params.delta0),
        j_matrices=total_j_matrices(),
        stiffness=None if stiffness is None else rotate_stiffness_voigt(stiffness, R),
    )


VOIGT_PAIRS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))


def strain6_to_tensor(eps6) -> np.ndarray:
    exx, eyy, ezz, exy, exz, eyz = eps6
    return np.array([[exx, exy, exz], [exy, eyy, eyz], [exz, eyz, ezz]])


def rotate_stiffness_voigt(C: np.ndarray, axes) -> np.ndarray:
    """Rotate an engineering-Voigt stiffness matrix to the device frame."""
    R = check_axes(axes)
    C4 = np.zeros((3, 3, 3, 3))
    for a, (i, j) in enumerate(VOIGT_PAIRS):
        for b, (k, l) in enumerate(VOIGT_PAIRS):
            for ij in ((i, j), (j, i)):
                for kl in ((k, l), (l, k)):
                    C4[ij[0], ij[1], kl[0], kl[1]] = C[a, b]
    C4r = np.einsum("ae,bf,cg,dh,efgh->abcd", R, R, R, R, C4)
    out = np.zeros((6, 6))
    for a, (i, j) in enumerate(VOIGT_PAIRS):
        for b, (k, l) in enumerate(VOIGT_PAIRS):
            out[a, b] = C4r[i, j, k, l]
    return out


def pikus_bir_scalars(eps6, av: float, b: float, d: float):
    """Deformation terms from the six strain components (tensor shears).

    P and Q are real, R and S complex:
        P = av (exx + eyy + ezz)
        Q = -(b/2) (exx + eyy - 2 ezz)
        R = (sqrt(3)/2) b (exx - eyy) - i d exy
        S = -d (exz - i eyz)
    """
    exx, eyy, ezz, exy, exz, eyz = eps6
    P = av * (exx + eyy + ezz)
    Q = -0.5 * b * (exx + eyy - 2.0 * ezz)
    R = 0.5 * np.sqrt(3.0) * b * (exx - eyy) - 1j * d * exy
    S = -d * (exz - 1j * eyz)
    return P, Q, R, S


def strain_block(frame: AssemblyFrame, eps6) -> np.ndarray:
    """6x6 deformation Hamiltonian for one strain sample (device frame)."""
    eps = strain6_to_tensor(eps6)
    return np.einsum("cdij,cd->ij", frame.strain, eps)


def bulk_hamiltonian(frame: AssemblyFrame, k=(0.0, 0.0, 0.0), eps6=None,
                     b_field=None) -> np.ndarray:
    """Dense bulk 6x6 at wave vector k (1/nm), optional strain and Zeeman."""
    kv = np.asarray(k, dtype=float)
    H = np.einsum("cdij,c,d->ij", frame.kinetic, kv, kv) + frame.so_matrix
    if eps6 is not None:
        H = H + strain_block(frame, eps6)
    if b_field is not None:
        H = H + zeeman_block(frame, b_field)
    return H


def zeeman_block(frame: AssemblyFrame, b_field) -> np.ndarray:
    """2 kappa muB J.B on the six-band total-angular-momentum matrices."""
    bv = np.asarray(b_field, dtype=float)
    return (2.0 * frame.params.kappa * CONSTANTS.bohr_magneton_muB
            * np.einsum("a,aij->ij", bv, frame.j_matrices))
