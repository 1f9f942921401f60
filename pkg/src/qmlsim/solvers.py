"""Spectrum solvers: dense Hermitian diagonalization and Lanczos margins.

The Lanczos solver is matrix-free and uses full reorthogonalization of
the Krylov basis; selective schemes save memory but admit ghost
eigenvalues, which is a bad trade at desk scale.  The start vector is
seeded and the seed is reported so runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import NumericError


@dataclass
class Spectrum:
    """Eigenvalues in ascending order with per-pair residuals."""

    eigenvalues: list[float]
    residuals: list[float]
    converged: list[bool]
    eigenvectors: np.ndarray | None = None  # columns, when requested
    seed: int | None = None
    iterations: int | None = None

    @property
    def all_converged(self) -> bool:
        return all(self.converged)


def full_spectrum(h: np.ndarray, want_vectors: bool = False) -> Spectrum:
    """All eigenvalues (and optionally orthonormal eigenvectors) of a
    dense Hermitian matrix."""
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if np.max(np.abs(h - h.conj().T)) > 1e-10 * max(1.0, np.abs(h).max()):
        raise NumericError("matrix is not Hermitian")
    w, v = np.linalg.eigh(h)
    res = np.linalg.norm(h @ v - v * w, axis=0)
    return Spectrum(
        eigenvalues=[float(x) for x in w],
        residuals=[float(r) for r in res],
        converged=[True] * len(w),
        eigenvectors=v if want_vectors else None,
    )


def lanczos_margins(
    apply_h: Callable[[np.ndarray], np.ndarray],
    dim: int,
    k: int = 4,
    max_iter: int = 300,
    tol: float = 1e-8,
    seed: int = 0,
    want_vectors: bool = False,
) -> Spectrum:
    """k smallest and k largest eigenvalues of a Hermitian operator given
    only its action on vectors.

    Krylov vectors are kept and reorthogonalized twice per iteration.
    On lucky breakdown (invariant subspace) the basis is extended with a
    fresh random direction and the off-diagonal entry set to zero, which
    block-decouples the tridiagonal matrix without spoiling Ritz values.
    Non-convergence within max_iter is not an error: the best estimates
    come back flagged unconverged.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if 2 * k > dim:
        raise ValueError(f"k too large: need 2k <= dim, got k={k}, dim={dim}")
    if max_iter < 2 * k:
        raise ValueError(f"max_iter must be >= 2k = {2 * k}, got {max_iter}")
    rng = np.random.Generator(np.random.Philox(seed))

    def random_unit() -> np.ndarray:
        v = rng.random(dim) - 0.5 + 1j * (rng.random(dim) - 0.5)
        return v / np.linalg.norm(v)

    max_iter = min(max_iter, dim)
    basis = np.zeros((dim, max_iter), dtype=np.complex128)
    alphas = np.zeros(max_iter)
    betas = np.zeros(max_iter)  # betas[j] couples v_j and v_{j+1}

    v = random_unit()
    basis[:, 0] = v
    scale = 1.0
    j = 0
    while True:
        w = apply_h(basis[:, j])
        alphas[j] = float(np.real(np.vdot(basis[:, j], w)))
        # full reorthogonalization, two passes
        for _ in range(2):
            w = w - basis[:, : j + 1] @ (basis[:, : j + 1].conj().T @ w)
        beta = float(np.linalg.norm(w))
        scale = max(scale, abs(alphas[j]), beta)
        j += 1
        if j >= max_iter:
            break
        if beta > 1e-13 * scale:
            betas[j - 1] = beta
            basis[:, j] = w / beta
        else:
            # invariant subspace: restart direction, decoupled block
            betas[j - 1] = 0.0
            fresh = random_unit()
            for _ in range(2):
                fresh = fresh - basis[:, :j] @ (basis[:, :j].conj().T @ fresh)
            nrm = np.linalg.norm(fresh)
            if nrm < 1e-12:
                j_used = j
                break
            basis[:, j] = fresh / nrm
        if j >= 2 * k and _margins_converged(
            alphas[:j], betas[: j - 1], k, tol * max(scale, 1.0)
        ):
            break
    j_used = j

    theta, s = eigh_tridiagonal(alphas[:j_used], betas[: j_used - 1])
    picks = list(range(k)) + list(range(j_used - k, j_used))
    vectors = basis[:, :j_used] @ s[:, picks]
    values = theta[picks]
    residuals = []
    for idx in range(2 * k):
        vec = vectors[:, idx]
        residuals.append(float(np.linalg.norm(apply_h(vec) - values[idx] * vec)))
    conv = [r <= tol * max(scale, 1.0) for r in residuals]
    return Spectrum(
        eigenvalues=[float(x) for x in values],
        residuals=residuals,
        converged=conv,
        eigenvectors=vectors if want_vectors else None,
        seed=seed,
        iterations=j_used,
    )


def _margins_converged(alphas, betas, k, tol) -> bool:
    j = len(alphas)
    theta, s = eigh_tridiagonal(alphas, betas)
    beta_last = betas[-1] if len(betas) else 0.0
    bounds = np.abs(beta_last * s[-1, :])
    picks = list(range(k)) + list(range(j - k, j))
    return bool(np.all(bounds[picks] <= tol))
