"""Average mixing matrix of a continuous-time quantum walk.

A walk on a graph with symmetric Hamiltonian H (here: the adjacency
matrix) evolves by U(t) = exp(iHt).  The instantaneous mixing matrix
U(t) ∘ U(−t) gives the probability of observing the walk at vertex j
having started at vertex i; its long-run Cesàro average has the closed
form

    Q = Σ_j P_j ∘ P_j

over the orthogonal projectors P_j onto the eigenspaces of H (∘ is the
entrywise product).  ``average_mixing_matrix`` implements the closed
form; ``cesaro_mixing_estimate`` is a deliberately independent numeric
time average used to cross-check it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_GROUP_TOL = 1e-8


@dataclass
class SpectralDecomposition:
    """Distinct eigenvalues of H and projectors onto their eigenspaces."""

    eigenvalues: np.ndarray  # ascending, one per eigenspace
    projectors: list[np.ndarray]  # symmetric idempotent, summing to I


def _check_hamiltonian(H: np.ndarray) -> np.ndarray:
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"Hamiltonian must be square, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise ValueError("Hamiltonian contains non-finite entries")
    scale = max(1.0, float(np.abs(H).max()))
    if np.abs(H - H.T).max() > 1e-10 * scale:
        raise ValueError("Hamiltonian is not symmetric")
    # exact symmetry for the eigensolver
    return (H + H.T) / 2.0


def spectral_decomposition(
    H: np.ndarray, group_tol: float = DEFAULT_GROUP_TOL
) -> SpectralDecomposition:
    """Eigen-decompose H, merging near-degenerate eigenvalues.

    Raw eigenvalues whose consecutive gap is at most
    ``group_tol * max(1, spectral radius)`` are treated as one
    eigenspace; the projector for a group is the sum of v·vᵀ over its
    eigenvectors.  Correct grouping is what makes the mixing matrix
    doubly stochastic in floating point.

    Parameters
    ----------
    H : ndarray
        Symmetric real matrix.
    group_tol : float
        Relative degeneracy threshold; must be > 0.

    Returns
    -------
    SpectralDecomposition
        Eigenvalues ascending (group means), one projector per group.
    """
    if group_tol <= 0:
        raise ValueError("group_tol must be positive")
    H = _check_hamiltonian(H)
    w, V = np.linalg.eigh(H)
    radius = float(np.abs(w).max()) if w.size else 0.0
    threshold = group_tol * max(1.0, radius)

    boundaries = [0]
    for k in range(1, len(w)):
        if w[k] - w[k - 1] > threshold:
            boundaries.append(k)
    boundaries.append(len(w))

    eigenvalues = []
    projectors = []
    for start, stop in zip(boundaries[:-1], boundaries[1:]):
        block = V[:, start:stop]
        P = block @ block.T
        projectors.append((P + P.T) / 2.0)
        eigenvalues.append(float(np.mean(w[start:stop])))
    return SpectralDecomposition(
        eigenvalues=np.array(eigenvalues), projectors=projectors
    )


def average_mixing_matrix(
    H: np.ndarray, group_tol: float = DEFAULT_GROUP_TOL
) -> np.ndarray:
    """Closed-form average mixing matrix Q = Σ_j P_j ∘ P_j.

    Q is symmetric and doubly stochastic: row i is the long-run average
    probability distribution of the walk started at vertex i.
    """
    decomp = spectral_decomposition(H, group_tol)
    n = H.shape[0]
    Q = np.zeros((n, n))
    for P in decomp.projectors:
        Q += P * P
    return Q


def cesaro_mixing_estimate(
    H: np.ndarray,
    horizon_T: float,
    steps: int,
    group_tol: float = DEFAULT_GROUP_TOL,
) -> np.ndarray:
    """Numeric time average (1/T)·∫₀ᵀ U(t) ∘ U(−t) dt.

    Trapezoidal quadrature over ``steps`` uniformly spaced samples of
    the instantaneous mixing matrix, with U(t) = Σ_j e^{iλ_j t} P_j
    evaluated from the spectral decomposition.  Converges to
    ``average_mixing_matrix(H)`` as the horizon grows (O(1/T)).

    Kept free of the closed form on purpose: this is the independent
    oracle the closed form is validated against.
    """
    if horizon_T <= 0:
        raise ValueError("horizon_T must be positive")
    if steps < 2:
        raise ValueError("steps must be at least 2")
    decomp = spectral_decomposition(H, group_tol)
    times = np.linspace(0.0, horizon_T, steps)
    # U for all samples at once: (steps, n, n) complex
    phases = np.exp(1j * np.outer(times, decomp.eigenvalues))
    stack = np.stack(decomp.projectors)  # (groups, n, n)
    U = np.tensordot(phases, stack, axes=([1], [0]))
    # U(t) ∘ U(−t) = U(t) ∘ conj(U(t)) = |U(t)|² entrywise (real)
    mixing = U.real**2 + U.imag**2
    dt = times[1] - times[0]
    integral = dt * (mixing.sum(axis=0) - (mixing[0] + mixing[-1]) / 2.0)
    return integral / horizon_T
