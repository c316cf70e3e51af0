"""Fixed points and the recurrent/transient decomposition.

The central computation is the eigenvalue-1 eigenspace pair of the channel's
superoperator M: the right kernel of (M - I) spans the fixed points of the
channel and the left kernel spans the fixed points of the adjoint.  Because
1 is a semisimple eigenvalue for trace-preserving maps, these two spaces
determine the spectral projection onto the eigenvalue-1 cluster,

    Pi_1 = K (L^H K)^{-1} L^H,

which applied to vec(I/d) yields the maximal-support invariant state whose
range is the recurrent subspace R.

Two execution tiers give identical semantics:

* small problems (d^2 <= 1600): one dense SVD of (M - I) yields both kernels;
* larger problems: shift-invert Arnoldi around sigma = 1 + 3e-6 (sparse LU
  when the Kraus family is sparse, dense LU otherwise) with orthogonal
  deflation restarts, because single-vector Arnoldi provably under-counts
  degenerate eigenvalue multiplicities.  Every accepted vector is
  residual-verified against M, so misconvergence cannot silently corrupt
  the result.
"""

from dataclasses import dataclass, field

import numpy as np

from .channels import (
    KrausChannel,
    _kraus_nnz_fraction,
    _superoperator_sparse,
    apply,
    apply_adjoint,
    is_state,
    superoperator,
)
from .errors import ArgumentError, DecompositionError
from .linalg import DEFAULT_TOL, Subspace, hermitian_span_basis, unvec, vec

__all__ = [
    "FixedSpace",
    "RecurrentSplit",
    "PerronFrobeniusCertificate",
    "fixed_space",
    "cesaro_average",
    "recurrent_split",
    "peripheral_spectrum",
    "perron_frobenius_certificate",
]

_DENSE_KERNEL_CUT = 1600
_DENSE_EIGVALS_CUT = 2500
_SPARSE_FRACTION = 0.02
_ARNOLDI_SEED = 1729
_MAX_DEFLATION_ROUNDS = 24


@dataclass(frozen=True)
class FixedSpace:
    """Fixed points F(Phi) = {X : Phi(X) = X}.

    ``basis`` is Hilbert-Schmidt-orthonormal over C; ``hermitian_basis``
    spans the same space with Hermitian matrices (F(Phi) is closed under
    X -> X^H because the channel has a Kraus form).
    """

    dim_ambient: int
    basis: tuple
    hermitian_basis: tuple

    @property
    def dimension(self):
        return len(self.basis)


@dataclass(frozen=True)
class RecurrentSplit:
    """The orthogonal split C^d = R ⊕ D.

    R is the closed span of supports of all invariant states, D = R^⊥ the
    transient part, and rho_max an invariant state with range exactly R.
    """

    R: Subspace
    D: Subspace
    rho_max: np.ndarray
    warnings: tuple = field(default_factory=tuple)


@dataclass(frozen=True)
class PerronFrobeniusCertificate:
    """Spectral irreducibility certificate.

    ``simple_and_faithful`` is True iff eigenvalue 1 is simple and the
    invariant state has full rank.
    """

    eigenvalue_1_multiplicity: int
    invariant_state_rank: int
    simple_and_faithful: bool


def _matvec_pair(ch):
    d = ch.dim

    def fwd(x):
        return vec(apply(ch, unvec(x, d)))

    def adj(x):
        return vec(apply_adjoint(ch, unvec(x, d)))

    return fwd, adj


def _deflated_kernel(solve, matvec, n2, sigma, tol):
    """All eigenvectors with |lambda - 1| <= eig_cluster_tol via shift-invert
    Arnoldi with orthogonal deflation restarts.

    Restarting with fresh seeded start vectors after deflating verified
    fixed vectors recovers degenerate multiplicities that a single Krylov
    run misses.  Deflation by an orthogonal projector is exact here because
    the deflated vectors lie inside the eigenspace being isolated.
    """
    import scipy.sparse.linalg as spla

    basis = np.zeros((n2, 0), dtype=complex)
    gap = np.inf
    empty_rounds = 0
    k = min(8, n2 - 2)
    for rnd in range(_MAX_DEFLATION_ROUNDS):
        rng = np.random.default_rng(_ARNOLDI_SEED + rnd)
        v0 = rng.standard_normal(n2) + 1j * rng.standard_normal(n2)
        v0 /= np.linalg.norm(v0)
        q = basis

        def op(x, q=q):
            y = x - q @ (q.conj().T @ x) if q.shape[1] else x
            y = solve(y)
            return y - q @ (q.conj().T @ y) if q.shape[1] else y

        lin = spla.LinearOperator((n2, n2), matvec=op, dtype=complex)
        try:
            mu, w = spla.eigs(lin, k=k, which="LM", v0=v0, maxiter=500)
        except spla.ArpackNoConvergence as err:
            mu, w = err.eigenvalues, err.eigenvectors
        accepted = 0
        in_cluster = 0
        for idx in np.argsort(-np.abs(mu)):
            if mu[idx] == 0.0:
                continue
            lam = sigma + 1.0 / mu[idx]
            if abs(lam - 1.0) > tol.eig_cluster_tol:
                gap = min(gap, abs(lam - 1.0))
                continue
            in_cluster += 1
            v = w[:, idx]
            if basis.shape[1]:
                v = v - basis @ (basis.conj().T @ v)
            norm = np.linalg.norm(v)
            if norm < 1e-6:
                continue
            v /= norm
            if np.linalg.norm(matvec(v) - v) <= tol.eig_cluster_tol:
                basis = np.hstack([basis, v[:, None]])
                accepted += 1
        if in_cluster == k and k < 32:
            # saturated draw: the cluster may be larger than k
            k = min(2 * k, 32, n2 - 2)
        empty_rounds = 0 if accepted else empty_rounds + 1
        if empty_rounds >= 2:
            break
        if basis.shape[1] > 256:
            raise DecompositionError(
                "fixed-space",
                "eigenvalue-1 multiplicity exceeds 256; refusing to continue",
            )
    return basis, gap


def _fixed_pair_arnoldi(ch, tol):
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    n2 = ch.dim**2
    sigma = 1.0 + 3e-6
    fwd, adj = _matvec_pair(ch)
    if _kraus_nnz_fraction(ch) <= _SPARSE_FRACTION:
        m = _superoperator_sparse(ch)
        shifted = (m - sigma * sp.identity(n2, dtype=complex, format="csc")).tocsc()
        lu = spla.splu(shifted)
        solve_fwd = lu.solve

        def solve_adj(b):
            return lu.solve(b, trans="H")

    else:
        from scipy.linalg import lu_factor, lu_solve

        m = superoperator(ch).matrix
        lu_piv = lu_factor(m - sigma * np.eye(n2))

        def solve_fwd(b):
            return lu_solve(lu_piv, b)

        def solve_adj(b):
            return lu_solve(lu_piv, b, trans=2)

    right, gap_r = _deflated_kernel(solve_fwd, fwd, n2, sigma, tol)
    left, gap_l = _deflated_kernel(solve_adj, adj, n2, np.conj(sigma), tol)
    if right.shape[1] != left.shape[1] or right.shape[1] == 0:
        raise DecompositionError(
            "fixed-space",
            "left/right eigenvalue-1 dimensions disagree "
            f"({right.shape[1]} vs {left.shape[1]})",
        )
    return right, left, min(gap_r, gap_l)


def _fixed_pair(ch, tol):
    """Orthonormal bases of ker(M - I) and ker(M^H - I).

    Returns
    -------
    right : (d^2, k) ndarray
        Fixed points of the channel, vectorized.
    left : (d^2, k) ndarray
        Fixed points of the adjoint, vectorized.
    gap : float
        Observed separation of the eigenvalue-1 cluster from the rest of
        the spectrum (a singular-value proxy on the dense tier).
    warnings : list of str
    """
    n2 = ch.dim**2
    if n2 <= _DENSE_KERNEL_CUT:
        m = superoperator(ch).matrix
        u, s, vh = np.linalg.svd(m - np.eye(n2))
        k = int(np.sum(s <= tol.eig_cluster_tol))
        if k == 0:
            raise DecompositionError(
                "fixed-space",
                "no eigenvalue-1 cluster found; is the channel trace preserving?",
            )
        right = vh[n2 - k :].conj().T
        left = u[:, n2 - k :]
        gap = float(s[n2 - k - 1]) if k < n2 else np.inf
    else:
        right, left, gap = _fixed_pair_arnoldi(ch, tol)
    warnings = []
    if gap < 10.0 * tol.eig_cluster_tol:
        warnings.append(
            "eigenvalue-1 cluster ill-separated "
            f"(nearest non-fixed distance {gap:.3e})"
        )
    return right, left, gap, warnings


def fixed_space(ch, tol=DEFAULT_TOL):
    """The space F(Phi) of matrices fixed by the channel.

    The dimension is at least 1: a trace-preserving map in finite dimension
    always has an invariant state.
    """
    right, _, _, _ = _fixed_pair(ch, tol)
    d = ch.dim
    basis = [unvec(right[:, i], d) for i in range(right.shape[1])]
    candidates = []
    for x in basis:
        candidates.append((x + x.conj().T) / 2.0)
        candidates.append((x - x.conj().T) / 2.0j)
    herm = hermitian_span_basis(candidates, tol)
    if len(herm) != len(basis):
        raise DecompositionError(
            "fixed-space",
            f"Hermitian re-extraction found dimension {len(herm)}, "
            f"expected {len(basis)}",
        )
    return FixedSpace(
        dim_ambient=d, basis=tuple(basis), hermitian_basis=tuple(herm)
    )


def cesaro_average(ch, rho, n):
    """Cesaro mean (1/n) sum_{k<n} Phi^k(rho) for a state rho."""
    if int(n) < 1:
        raise ArgumentError("n must be at least 1")
    if not is_state(rho):
        raise ArgumentError("rho is not a state")
    current = np.asarray(rho, dtype=complex)
    acc = current.copy()
    for _ in range(int(n) - 1):
        current = apply(ch, current)
        acc += current
    return acc / float(n)


def _rho_max_from_pair(ch, right, left):
    d = ch.dim
    pairing = left.conj().T @ right
    target = left.conj().T @ vec(np.eye(d, dtype=complex) / d)
    try:
        coeff = np.linalg.solve(pairing, target)
    except np.linalg.LinAlgError as err:
        raise DecompositionError(
            "recurrent-split",
            f"left/right eigenvalue-1 pairing is singular ({err})",
        ) from err
    rho = unvec(right @ coeff, d)
    rho = (rho + rho.conj().T) / 2.0
    trace = np.trace(rho).real
    if trace <= 0.0:
        raise DecompositionError(
            "recurrent-split", f"spectral projection of I/d has trace {trace:.3e}"
        )
    return rho / trace


def recurrent_split(ch, tol=DEFAULT_TOL):
    """Split C^d into the recurrent subspace R and the transient part D.

    rho_max is the eigenvalue-1 spectral projection of the superoperator
    applied to vec(I/d), Hermitized and normalized; its range at rank_tol
    is R and D is the orthocomplement.  Every invariant state is supported
    inside R.
    """
    right, left, _, warnings = _fixed_pair(ch, tol)
    rho = _rho_max_from_pair(ch, right, left)
    w, v = np.linalg.eigh(rho)
    if w[0] < -tol.psd_tol:
        raise DecompositionError(
            "recurrent-split", f"rho_max is not PSD (min eigenvalue {w[0]:.3e})"
        )
    cutoff = tol.rank_tol * w[-1]
    mask = w >= cutoff
    d = ch.dim
    r_space = Subspace(d, v[:, mask])
    d_space = Subspace(d, v[:, ~mask])
    return RecurrentSplit(
        R=r_space, D=d_space, rho_max=rho, warnings=tuple(warnings)
    )


def peripheral_spectrum(ch, tol=DEFAULT_TOL):
    """Eigenvalues of the superoperator with |lambda| >= 1 - eig_cluster_tol.

    Sorted by argument.  Beyond the dense-eigenvalue size cutoff the list
    comes from Arnoldi Ritz values of largest modulus; degenerate
    multiplicities are then not certified.
    """
    n2 = ch.dim**2
    if n2 <= _DENSE_EIGVALS_CUT:
        w = np.linalg.eigvals(superoperator(ch).matrix)
    else:
        import scipy.sparse.linalg as spla

        fwd, _ = _matvec_pair(ch)
        lin = spla.LinearOperator((n2, n2), matvec=fwd, dtype=complex)
        v0 = np.ones(n2) / np.sqrt(n2)
        try:
            w = spla.eigs(
                lin,
                k=min(24, n2 - 2),
                which="LM",
                v0=v0,
                return_eigenvectors=False,
            )
        except spla.ArpackNoConvergence as err:  # pragma: no cover
            w = err.eigenvalues
    kept = [complex(z) for z in w if abs(z) >= 1.0 - tol.eig_cluster_tol]
    return sorted(kept, key=lambda z: (np.angle(z), z.real, z.imag))


def perron_frobenius_certificate(ch, tol=DEFAULT_TOL):
    """Multiplicity of eigenvalue 1 and the rank of the maximal invariant state."""
    right, left, _, _ = _fixed_pair(ch, tol)
    rho = _rho_max_from_pair(ch, right, left)
    w = np.linalg.eigvalsh(rho)
    rank = int(np.sum(w >= tol.rank_tol * w[-1]))
    multiplicity = right.shape[1]
    return PerronFrobeniusCertificate(
        eigenvalue_1_multiplicity=multiplicity,
        invariant_state_rank=rank,
        simple_and_faithful=bool(multiplicity == 1 and rank == ch.dim),
    )
