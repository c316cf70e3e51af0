"""Quantum channels in Kraus form.

A channel is represented by a finite family of d x d Kraus matrices
(V_i) with sum_i V_i^H V_i = I (trace preservation).  The module provides
application of the channel and its adjoint, the matrix of the channel
under column-stacking vectorization, trace-preservation validation, and
constructors for classical Markov-chain channels, truncated open quantum
random walks, and the Bloch-affine form of qubit channels.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .linalg import DEFAULT_TOL, Tolerance, as_complex_matrix, vec

__all__ = [
    "KrausChannel",
    "Superoperator",
    "ValidationReport",
    "is_state",
    "apply",
    "apply_adjoint",
    "superoperator",
    "validate",
    "from_markov_chain",
    "oqrw_transition_map",
    "from_oqrw",
    "qubit_bloch_form",
]


class KrausChannel:
    """A completely positive trace-preserving map in Kraus form.

    Parameters
    ----------
    kraus : sequence of (d, d) array_like
        The Kraus operators V_i.  All-zero operators are dropped (the index
        set of an unravelling is arbitrary; zero operators are inert).
    unchecked : bool, optional
        Skip the eager trace-preservation check.  Needed to exercise the
        failure path of :func:`validate`; everything downstream assumes a
        trace-preserving family.
    tol : Tolerance, optional
        Tolerance used for the eager check.
    """

    __slots__ = ("dim", "kraus", "_stack")

    def __init__(self, kraus, *, unchecked=False, tol=DEFAULT_TOL):
        mats = [as_complex_matrix(v, f"kraus[{i}]") for i, v in enumerate(kraus)]
        if not mats:
            raise ArgumentError("a channel needs at least one Kraus operator")
        d = mats[0].shape[0]
        for i, m in enumerate(mats):
            if m.ndim != 2 or m.shape != (d, d):
                raise ArgumentError(
                    f"kraus[{i}] has shape {m.shape}, expected ({d}, {d})"
                )
        kept = [m for m in mats if np.abs(m).max() > 0.0]
        if not kept:
            raise ArgumentError("all Kraus operators are zero")
        stack = np.ascontiguousarray(np.stack(kept))
        if not unchecked:
            dev = np.abs(
                np.einsum("aji,ajk->ik", stack.conj(), stack) - np.eye(d)
            ).max()
            if dev > 10.0 * tol.psd_tol:
                raise ArgumentError(
                    "Kraus family is not trace preserving "
                    f"(|sum V^H V - I|_max = {dev:.3e}); "
                    "pass unchecked=True to construct anyway"
                )
        object.__setattr__(self, "dim", int(d))
        object.__setattr__(self, "kraus", tuple(kept))
        object.__setattr__(self, "_stack", stack)

    def __setattr__(self, name, value):
        raise AttributeError("KrausChannel is immutable")

    def __len__(self):
        return len(self.kraus)

    def __repr__(self):
        return f"KrausChannel(dim={self.dim}, n_kraus={len(self.kraus)})"


@dataclass(frozen=True)
class Superoperator:
    """Dense matrix of a channel under column-stacking vectorization."""

    dim: int
    matrix: np.ndarray


@dataclass(frozen=True)
class ValidationReport:
    """Result of :func:`validate`."""

    kraus_sum_deviation: float
    spectral_radius: float
    trace_preserving: bool
    spectral_radius_ok: bool

    @property
    def passed(self):
        return self.trace_preserving and self.spectral_radius_ok


def is_state(rho, tol=DEFAULT_TOL):
    """Density-matrix predicate: Hermitian, PSD within psd_tol, trace 1."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if np.abs(rho - rho.conj().T).max() > 100.0 * tol.psd_tol * max(
        1.0, np.abs(rho).max()
    ):
        return False
    if abs(np.trace(rho).real - 1.0) > 1e-8 or abs(np.trace(rho).imag) > 1e-8:
        return False
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)
    return bool(w[0] >= -tol.psd_tol)


def apply(ch, rho):
    """Apply the channel: sum_i V_i rho V_i^H."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (ch.dim, ch.dim):
        raise ArgumentError(
            f"state shape {rho.shape} does not match channel dimension {ch.dim}"
        )
    v = ch._stack
    return np.einsum("aij,jk,alk->il", v, rho, v.conj(), optimize=True)


def apply_adjoint(ch, x):
    """Apply the adjoint map: sum_i V_i^H X V_i (unital when TP)."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (ch.dim, ch.dim):
        raise ArgumentError(
            f"operand shape {x.shape} does not match channel dimension {ch.dim}"
        )
    v = ch._stack
    return np.einsum("aji,jk,akl->il", v.conj(), x, v, optimize=True)


def superoperator(ch):
    """Matrix M with M vec(rho) = vec(apply(rho)), vec stacking columns.

    Equals sum_i conj(V_i) ⊗ V_i.
    """
    d = ch.dim
    v = ch._stack
    m = np.einsum("aik,ajl->jilk", v, v.conj(), optimize=True)
    return Superoperator(dim=d, matrix=m.reshape(d * d, d * d))


def _superoperator_sparse(ch):
    """Sparse CSC superoperator (worth it only for sparse Kraus families)."""
    import scipy.sparse as sp

    terms = [
        sp.kron(sp.csc_matrix(v.conj()), sp.csc_matrix(v), format="csc")
        for v in ch.kraus
    ]
    result = terms[0]
    for t in terms[1:]:
        result = result + t
    return result.tocsc()


def _kraus_nnz_fraction(ch):
    """Fraction of nonzero entries of the superoperator, from Kraus sparsity."""
    n2 = ch.dim**2
    nnz = sum(int(np.count_nonzero(v)) ** 2 for v in ch.kraus)
    return min(1.0, nnz / float(n2 * n2))


def _spectral_radius(ch, tol=DEFAULT_TOL):
    """Spectral radius of the superoperator (dense below ~2500, else Arnoldi)."""
    n2 = ch.dim**2
    if n2 <= 2500:
        w = np.linalg.eigvals(superoperator(ch).matrix)
        return float(np.abs(w).max())
    import scipy.sparse.linalg as spla

    op = spla.LinearOperator(
        (n2, n2),
        matvec=lambda x: vec(apply(ch, x.reshape((ch.dim, ch.dim), order="F"))),
        dtype=complex,
    )
    v0 = np.ones(n2) / np.sqrt(n2)
    try:
        w = spla.eigs(
            op, k=min(6, n2 - 2), which="LM", v0=v0, return_eigenvectors=False
        )
    except spla.ArpackNoConvergence as err:  # pragma: no cover - defensive
        w = err.eigenvalues
    return float(np.abs(w).max()) if len(w) else 0.0


def validate(ch, tol=DEFAULT_TOL):
    """Check trace preservation and the spectral-radius bound.

    Reports |sum V_i^H V_i - I|_max, the spectral radius of the
    superoperator, and pass/fail flags.
    """
    v = ch._stack
    dev = float(
        np.abs(np.einsum("aji,ajk->ik", v.conj(), v) - np.eye(ch.dim)).max()
    )
    radius = _spectral_radius(ch, tol)
    return ValidationReport(
        kraus_sum_deviation=dev,
        spectral_radius=radius,
        trace_preserving=dev <= 10.0 * tol.psd_tol,
        spectral_radius_ok=radius <= 1.0 + tol.eig_cluster_tol,
    )


def from_markov_chain(p, tol=DEFAULT_TOL):
    """Channel of a classical Markov chain.

    Parameters
    ----------
    p : (n, n) array_like
        Column-stochastic transition matrix: p[i, j] is the probability of
        jumping from state j to state i, columns sum to one.

    Returns
    -------
    KrausChannel
        Kraus operators sqrt(p[i, j]) |e_i><e_j| (zero entries dropped).
        Diagonal states evolve exactly as the classical chain.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ArgumentError("transition matrix must be square")
    n = p.shape[0]
    if p.min() < -1e-12:
        raise ArgumentError("transition matrix has negative entries")
    p = np.where(p < 0.0, 0.0, p)
    col_dev = np.abs(p.sum(axis=0) - 1.0).max()
    if col_dev > 1e-12:
        raise ArgumentError(
            f"columns must sum to one (deviation {col_dev:.3e})"
        )
    kraus = []
    for j in range(n):
        for i in range(n):
            if p[i, j] > 0.0:
                v = np.zeros((n, n), dtype=complex)
                v[i, j] = np.sqrt(p[i, j])
                kraus.append(v)
    return KrausChannel(kraus, tol=tol)


def oqrw_transition_map(p, q, num_sites):
    """Nearest-neighbour transition operators of a half-line open quantum
    random walk whose jump rates depend on a three-level internal state.

    Internal space C^3; sites 0..N on the half-line with N = num_sites.
    Requires 0 < p < 1/2 and p + q < 1 with q > 0.  The returned map
    contains L_{N+1,N}, which :func:`from_oqrw` removes via the reflecting
    boundary rule.

    Returns
    -------
    dict mapping (i, j) -> (3, 3) ndarray
    """
    if not (0.0 < p < 0.5):
        raise ArgumentError("p must satisfy 0 < p < 1/2")
    if not (0.0 < q and p + q < 1.0):
        raise ArgumentError("q must satisfy q > 0 and p + q < 1")
    n_sites = num_sites + 1
    eye3 = np.eye(3, dtype=complex)
    l_up = np.sqrt(p) * eye3
    l_down = np.diag([np.sqrt(1 - p), np.sqrt(1 - p), np.sqrt(q)]).astype(complex)
    l_stay = np.sqrt((1 - p - q) / 2.0) * np.array(
        [[0, 0, 1], [0, 0, 1], [0, 0, 0]], dtype=complex
    )
    transitions = {(0, 0): np.sqrt(1 - p) * eye3}
    for j in range(n_sites):
        if j >= 1:
            transitions[(j, j)] = l_stay
            transitions[(j - 1, j)] = l_down
        transitions[(j + 1, j)] = l_up
    return transitions


def from_oqrw(transitions, num_sites, tol=DEFAULT_TOL):
    """Truncated open quantum random walk channel on C^(n*(N+1)).

    Parameters
    ----------
    transitions : mapping (i, j) -> (n, n) array_like
        Site-transition operators L_{i,j} of the walk, for source sites
        0 <= j <= N.  Every retained column j must satisfy
        sum_i L_{i,j}^H L_{i,j} = I within 1e-12 *before* truncation.
    num_sites : int
        Truncation index N; sites 0..N are kept.

    Notes
    -----
    Reflecting boundary: at the last site N the outgoing operator
    L_{N+1,N} is removed and L_{N-1,N} is rescaled by the unique
    nonnegative diagonal factor restoring normalization.  The ambient
    ordering is internal ⊗ site, i.e. basis vector e_a ⊗ |j> sits at
    index a*(N+1) + j.
    """
    n_last = int(num_sites)
    if n_last < 0:
        raise ArgumentError("num_sites must be nonnegative")
    n_sites = n_last + 1
    ops = {}
    n_int = None
    for (i, j), mat in transitions.items():
        mat = as_complex_matrix(mat, f"L[{i},{j}]")
        if n_int is None:
            n_int = mat.shape[0]
        if mat.ndim != 2 or mat.shape != (n_int, n_int):
            raise ArgumentError(f"L[{i},{j}] must be {n_int}x{n_int}")
        if j < 0 or i < 0:
            raise ArgumentError("site indices must be nonnegative")
        if j <= n_last:
            ops[(i, j)] = mat
    if n_int is None:
        raise ArgumentError("transition map is empty")

    eye = np.eye(n_int)
    for j in range(n_sites):
        total = sum(
            m.conj().T @ m for (i, jj), m in ops.items() if jj == j
        )
        if not isinstance(total, np.ndarray) or np.abs(total - eye).max() > 1e-12:
            raise ArgumentError(
                f"column {j} is not normalized before truncation"
            )

    overflow = [(i, j) for (i, j) in ops if i > n_last]
    for (i, j) in overflow:
        if (i, j) != (n_last + 1, n_last):
            raise ArgumentError(
                f"operator L[{i},{j}] jumps beyond the truncated lattice"
            )
    if overflow:
        del ops[(n_last + 1, n_last)]
        back = (n_last - 1, n_last)
        if back[0] < 0 or back not in ops:
            raise ArgumentError("normalization failure after adjustment")
        others = sum(
            m.conj().T @ m
            for (i, jj), m in ops.items()
            if jj == n_last and (i, jj) != back
        )
        if not isinstance(others, np.ndarray):
            others = np.zeros((n_int, n_int), dtype=complex)
        target = eye - others
        gram = ops[back].conj().T @ ops[back]
        off_mass = max(
            np.abs(target - np.diag(np.diag(target))).max(),
            np.abs(gram - np.diag(np.diag(gram))).max(),
        )
        if off_mass > 1e-12:
            raise ArgumentError("normalization failure after adjustment")
        t_diag, g_diag = np.diag(target).real, np.diag(gram).real
        scale = np.zeros(n_int)
        for k in range(n_int):
            if g_diag[k] > 1e-12:
                if t_diag[k] < -1e-12:
                    raise ArgumentError("normalization failure after adjustment")
                scale[k] = np.sqrt(max(t_diag[k], 0.0) / g_diag[k])
            elif abs(t_diag[k]) > 1e-12:
                raise ArgumentError("normalization failure after adjustment")
        ops[back] = ops[back] @ np.diag(scale)
        check = others + ops[back].conj().T @ ops[back]
        if np.abs(check - eye).max() > 1e-12:
            raise ArgumentError("normalization failure after adjustment")

    kraus = []
    for (i, j), mat in sorted(ops.items()):
        if np.abs(mat).max() == 0.0:
            continue
        site = np.zeros((n_sites, n_sites), dtype=complex)
        site[i, j] = 1.0
        kraus.append(np.kron(mat, site))
    return KrausChannel(kraus, tol=tol)


# Normalized Pauli basis: sigma_0 = I/sqrt(2), sigma_k = pauli_k/sqrt(2).
_PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
) / np.sqrt(2.0)


def qubit_bloch_form(ch):
    """Affine Bloch action (b, A) of a qubit channel.

    With the normalized Pauli basis sigma_0..sigma_3, the channel acts as
    Phi(sigma_0 + u . sigma) = sigma_0 + (b + A u) . sigma.

    Returns
    -------
    b : (3,) float ndarray
    A : (3, 3) float ndarray
    """
    if ch.dim != 2:
        raise ArgumentError("qubit_bloch_form requires a channel on C^2")
    images = [apply(ch, _PAULI[k]) for k in range(4)]
    b = np.array([np.trace(_PAULI[i] @ images[0]) for i in (1, 2, 3)])
    a = np.array(
        [[np.trace(_PAULI[i] @ images[j]) for j in (1, 2, 3)] for i in (1, 2, 3)]
    )
    imag_max = max(np.abs(b.imag).max(), np.abs(a.imag).max())
    if imag_max > 1e-10:
        raise ArgumentError(
            f"Bloch coefficients are not real (residual {imag_max:.3e}); "
            "is the Kraus family trace preserving?"
        )
    return b.real, a.real
