"""Biorthogonal eigendecomposition of effective-Hamiltonian blocks.

The blocks are non-Hermitian (complex symmetric for real couplings, but
that is not assumed), so right and left eigenvectors differ. Right
vectors come from the block itself, left vectors from the adjoint
problem; the two sets are matched greedily by overlap magnitude and
rescaled so that left @ right is the identity. Matrices too close to a
non-diagonalizable point are rejected rather than regularized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DefectiveHamiltonian
from .fockspace import OperatorBlock, SystemSpec, effective_hamiltonian_block

RECONSTRUCTION_TOL = 1e-10
CONDITION_LIMIT = 1e8
# Eigenvalue clusters closer than this (relative to the spectral span) are
# treated as degenerate when enforcing biorthonormality.
_CLUSTER_RTOL = 1e-9


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues with paired right/left eigenvectors of one block.

    ``right`` holds right eigenvectors as columns, ``left`` holds left
    eigenvectors as rows, normalized so that ``left @ right`` is the
    identity. Eigenvalues are sorted by ascending real part, ties broken
    by ascending imaginary part.
    """

    n: int
    eigenvalues: np.ndarray
    right: np.ndarray = field(repr=False)
    left: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)


def _sorted(evals: np.ndarray, right: np.ndarray, left: np.ndarray):
    order = np.lexsort((evals.imag, evals.real))
    return evals[order], right[:, order], left[order, :]


def _greedy_match(overlap: np.ndarray) -> np.ndarray:
    """Assign left candidates (rows) to right vectors (cols), largest
    overlap first. Returns row index chosen for each column."""
    mag = np.abs(overlap).copy()
    dim = mag.shape[0]
    assignment = np.full(dim, -1)
    for _ in range(dim):
        r, c = np.unravel_index(np.argmax(mag), mag.shape)
        assignment[c] = r
        mag[r, :] = -1.0
        mag[:, c] = -1.0
    return assignment


def _fix_degenerate_clusters(evals, right, left, scale):
    """Re-mix left vectors inside (near-)degenerate eigenvalue clusters so
    that biorthonormality holds across the cluster, not just pairwise."""
    gram = left @ right
    off = gram - np.eye(len(evals))
    if np.max(np.abs(off)) <= 1e-10:
        return left
    ctol = max(_CLUSTER_RTOL * scale, 1e-300)
    order = np.argsort(evals.real, kind="stable")
    clusters, current = [], [order[0]]
    for idx in order[1:]:
        if abs(evals[idx] - evals[current[-1]]) <= ctol:
            current.append(idx)
        else:
            clusters.append(current)
            current = [idx]
    clusters.append(current)
    left = left.copy()
    for cluster in clusters:
        if len(cluster) == 1:
            continue
        sel = np.array(cluster)
        gram_c = left[sel, :] @ right[:, sel]
        try:
            left[sel, :] = np.linalg.solve(gram_c, left[sel, :])
        except np.linalg.LinAlgError as exc:
            raise DefectiveHamiltonian(
                "degenerate eigenvalue cluster has linearly dependent eigenvectors"
            ) from exc
    return left


def decompose(block: OperatorBlock) -> Spectrum:
    """Biorthogonal spectrum of a square operator block.

    Raises DefectiveHamiltonian when the eigenvector basis is too ill
    conditioned to trust (condition number above 1e8) or when the
    decomposition fails to reconstruct the block to relative 1e-10;
    either signals a non-diagonalizable point.
    """
    h = np.asarray(block.entries, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("spectral decomposition needs a square block")
    dim = h.shape[0]
    if dim == 0:
        empty = np.zeros((0, 0), dtype=complex)
        return Spectrum(block.rows, np.zeros(0, dtype=complex), empty, empty)
    if dim == 1:
        one = np.ones((1, 1), dtype=complex)
        return Spectrum(block.rows, h[0, 0:1].astype(complex), one, one)

    hnorm = np.linalg.norm(h)
    if np.linalg.norm(h - h.conj().T) <= 1e-13 * max(hnorm, 1.0):
        vals, vecs = np.linalg.eigh(h)
        evals, right, left = _sorted(vals.astype(complex), vecs, vecs.conj().T)
        return Spectrum(block.rows, evals, right, left)

    evals, right = np.linalg.eig(h)
    cond = np.linalg.cond(right)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise DefectiveHamiltonian(
            f"eigenvector condition number {cond:.3e} exceeds {CONDITION_LIMIT:.0e}; "
            "the block is (numerically) non-diagonalizable"
        )
    adj_evals, adj_vecs = np.linalg.eig(h.conj().T)
    left_candidates = adj_vecs.conj().T
    assignment = _greedy_match(left_candidates @ right)
    left = left_candidates[assignment, :]

    pair = np.einsum("ij,ji->i", left, right)
    scale = max(float(np.max(np.abs(evals))), hnorm, 1e-300)
    if np.min(np.abs(pair)) < 1e-14:
        raise DefectiveHamiltonian(
            "matched left/right eigenvectors are numerically orthogonal; "
            "the block sits at (or too near) a non-diagonalizable point"
        )
    left = left / pair[:, None]
    left = _fix_degenerate_clusters(evals, right, left, scale)

    residual = np.linalg.norm((right * evals[None, :]) @ left - h) / max(hnorm, 1e-300)
    if residual > RECONSTRUCTION_TOL:
        raise DefectiveHamiltonian(
            f"spectral reconstruction residual {residual:.3e} exceeds "
            f"{RECONSTRUCTION_TOL:.0e}; the block is too close to a "
            "non-diagonalizable point"
        )
    evals, right, left = _sorted(evals, right, left)
    return Spectrum(block.rows, evals, right, left)


def decompose_all(
    spec: SystemSpec, nmax: int, boson_cap: int | None = None
) -> dict[int, Spectrum]:
    """Spectra of every manifold from the vacuum up to nmax."""
    return {
        n: decompose(effective_hamiltonian_block(spec, n, boson_cap))
        for n in range(nmax + 1)
    }
