"""Dense complex matrix utilities and subspace arithmetic.

All higher layers consume the single tolerance policy defined here:
``rank_tol`` is a relative singular-value cutoff, ``eig_cluster_tol`` groups
eigenvalues (e.g. the distance |lambda - 1| that counts as "fixed") and
``psd_tol`` is the magnitude of negative eigenvalues tolerated when deciding
positive semidefiniteness.

Subspaces of C^d are stored as orthonormal column frames.  Frames are gauge
dependent, so subspace equality always means equality of the orthogonal
projectors, never of the frames themselves.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "Subspace",
    "orthonormal_basis",
    "subspace_sum",
    "subspace_intersection",
    "relative_orthocomplement",
    "projector",
    "loewner_geq",
    "vec",
    "unvec",
    "hermitian_encode",
    "hermitian_decode",
    "hermitian_span_basis",
]


@dataclass(frozen=True)
class Tolerance:
    """Numerical tolerance policy shared by every operation.

    Attributes
    ----------
    rank_tol : float
        Relative singular-value cutoff for numerical rank decisions.
    eig_cluster_tol : float
        Distance used to group eigenvalues into clusters, e.g. |lambda - 1|.
    psd_tol : float
        Allowed magnitude of negative eigenvalues in PSD checks.
    """

    rank_tol: float = 1e-9
    eig_cluster_tol: float = 1e-8
    psd_tol: float = 1e-9

    def __post_init__(self):
        for name in ("rank_tol", "eig_cluster_tol", "psd_tol"):
            value = getattr(self, name)
            if not (0.0 < value <= 1e-2):
                raise ArgumentError(
                    f"{name} must lie in (0, 1e-2], got {value!r}"
                )

    @property
    def subspace_tol(self):
        """Threshold for subspace membership/fixedness residuals."""
        return 10.0 * self.eig_cluster_tol


DEFAULT_TOL = Tolerance()


def as_complex_matrix(a, name="matrix"):
    """Coerce ``a`` to a complex ndarray and reject non-finite entries."""
    m = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
        raise ArgumentError(f"{name} contains non-finite entries")
    return m


def _check_hermitian(x, tol, name="matrix"):
    dev = np.abs(x - x.conj().T).max() if x.size else 0.0
    scale = max(1.0, np.abs(x).max()) if x.size else 1.0
    if dev > 100.0 * tol.psd_tol * scale:
        raise ArgumentError(
            f"{name} is not Hermitian (deviation {dev:.3e})"
        )


class Subspace:
    """A subspace of C^d stored as an orthonormal column frame.

    Parameters
    ----------
    ambient_dim : int
        Dimension d of the ambient space.
    frame : (d, k) complex ndarray
        Matrix whose columns form an orthonormal basis of the subspace.
    """

    __slots__ = ("ambient_dim", "frame")

    def __init__(self, ambient_dim, frame):
        frame = as_complex_matrix(frame, "frame")
        if frame.ndim != 2 or frame.shape[0] != ambient_dim:
            raise ArgumentError(
                f"frame shape {frame.shape} incompatible with ambient "
                f"dimension {ambient_dim}"
            )
        if frame.shape[1] > ambient_dim:
            raise ArgumentError("subspace dimension exceeds ambient dimension")
        if frame.shape[1]:
            gram = frame.conj().T @ frame
            dev = np.abs(gram - np.eye(frame.shape[1])).max()
            if dev > 1e-7:
                raise ArgumentError(
                    f"frame columns are not orthonormal (deviation {dev:.3e})"
                )
        object.__setattr__(self, "ambient_dim", int(ambient_dim))
        object.__setattr__(self, "frame", frame)

    def __setattr__(self, name, value):
        raise AttributeError("Subspace is immutable")

    @classmethod
    def zero(cls, ambient_dim):
        """The zero subspace of C^d."""
        return cls(ambient_dim, np.zeros((ambient_dim, 0), dtype=complex))

    @classmethod
    def full(cls, ambient_dim):
        """The full space C^d."""
        return cls(ambient_dim, np.eye(ambient_dim, dtype=complex))

    @property
    def dimension(self):
        return self.frame.shape[1]

    def projector(self):
        """Orthogonal projector onto the subspace (d x d matrix)."""
        return self.frame @ self.frame.conj().T

    def contains_vector(self, x, tol=DEFAULT_TOL):
        """Whether the vector ``x`` lies in the subspace, relative to |x|."""
        x = np.asarray(x, dtype=complex).reshape(-1)
        norm = np.linalg.norm(x)
        if norm == 0.0:
            return True
        residual = x - self.frame @ (self.frame.conj().T @ x)
        return np.linalg.norm(residual) <= tol.subspace_tol * norm

    def contains(self, other, tol=DEFAULT_TOL):
        """Whether ``other`` (a Subspace) is contained in this subspace."""
        if other.ambient_dim != self.ambient_dim:
            raise ArgumentError("ambient dimensions differ")
        if other.dimension == 0:
            return True
        residual = other.frame - self.frame @ (
            self.frame.conj().T @ other.frame
        )
        return np.abs(residual).max() <= tol.subspace_tol

    def approx_equal(self, other, tol=DEFAULT_TOL):
        """Projector equality within tolerance (frames are gauge dependent)."""
        if other.ambient_dim != self.ambient_dim:
            raise ArgumentError("ambient dimensions differ")
        diff = np.abs(self.projector() - other.projector()).max()
        return diff <= tol.subspace_tol

    def orthocomplement(self):
        """The orthogonal complement as a Subspace."""
        d, k = self.ambient_dim, self.dimension
        if k == 0:
            return Subspace.full(d)
        if k == d:
            return Subspace.zero(d)
        # Eigenvectors of the projector at eigenvalue 0 form an exact
        # orthonormal basis of the complement.
        w, v = np.linalg.eigh(self.projector())
        return Subspace(d, v[:, : d - k])

    def __repr__(self):
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dimension})"


def orthonormal_basis(vectors, tol=DEFAULT_TOL, ambient_dim=None):
    """Span of a list of vectors as a Subspace.

    Numerical rank is decided by singular values >= rank_tol times the
    largest singular value.  Deterministic for a fixed input order.

    Parameters
    ----------
    vectors : sequence of 1-d arrays, or a (d, m) matrix of columns
    tol : Tolerance
    ambient_dim : int, optional
        Required when ``vectors`` is empty.
    """
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        cols = as_complex_matrix(vectors, "vectors")
    else:
        vecs = [np.asarray(v, dtype=complex).reshape(-1) for v in vectors]
        if not vecs:
            if ambient_dim is None:
                raise ArgumentError("ambient dimension required")
            return Subspace.zero(ambient_dim)
        dims = {v.shape[0] for v in vecs}
        if len(dims) != 1:
            raise ArgumentError("vectors do not share one ambient dimension")
        cols = as_complex_matrix(np.column_stack(vecs), "vectors")
    if ambient_dim is not None and cols.shape[0] != ambient_dim:
        raise ArgumentError("vectors do not match the given ambient dimension")
    d = cols.shape[0]
    if cols.shape[1] == 0:
        return Subspace.zero(d)
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return Subspace.zero(d)
    rank = int(np.sum(s >= tol.rank_tol * s[0]))
    return Subspace(d, u[:, :rank])


def subspace_sum(s1, s2, tol=DEFAULT_TOL):
    """Span of the union of two subspaces."""
    if s1.ambient_dim != s2.ambient_dim:
        raise ArgumentError("ambient dimensions differ")
    stacked = np.hstack([s1.frame, s2.frame])
    return orthonormal_basis(stacked, tol, ambient_dim=s1.ambient_dim)


def subspace_intersection(s1, s2, tol=DEFAULT_TOL):
    """Intersection of two subspaces.

    Computed as the eigenspace of P1 + P2 at eigenvalue 2 within
    eig_cluster_tol, where P1, P2 are the orthogonal projectors.
    """
    if s1.ambient_dim != s2.ambient_dim:
        raise ArgumentError("ambient dimensions differ")
    d = s1.ambient_dim
    w, v = np.linalg.eigh(s1.projector() + s2.projector())
    mask = np.abs(w - 2.0) <= tol.eig_cluster_tol
    if not np.any(mask):
        return Subspace.zero(d)
    return Subspace(d, v[:, mask])


def relative_orthocomplement(s, w, tol=DEFAULT_TOL):
    """The subspace S intersected with the orthocomplement of W, for W ⊆ S."""
    if s.ambient_dim != w.ambient_dim:
        raise ArgumentError("ambient dimensions differ")
    if not s.contains(w, tol):
        raise ArgumentError("W not contained in S")
    reduced = s.frame - w.frame @ (w.frame.conj().T @ s.frame)
    return orthonormal_basis(reduced, tol, ambient_dim=s.ambient_dim)


def projector(s):
    """Orthogonal projector of a Subspace as a dense matrix."""
    return s.projector()


def loewner_geq(x, y, tol=DEFAULT_TOL):
    """Operator-order comparison X >= Y.

    True iff the minimum eigenvalue of X - Y is >= -psd_tol.  Both inputs
    must be Hermitian within tolerance.
    """
    x = as_complex_matrix(x, "X")
    y = as_complex_matrix(y, "Y")
    if x.shape != y.shape or x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ArgumentError("operands must be square matrices of equal shape")
    _check_hermitian(x, tol, "X")
    _check_hermitian(y, tol, "Y")
    diff = (x - y + (x - y).conj().T) / 2.0
    w = np.linalg.eigvalsh(diff)
    return bool(w[0] >= -tol.psd_tol)


def vec(rho):
    """Column-stacking vectorization: columns of ``rho`` top to bottom."""
    return np.asarray(rho, dtype=complex).reshape(-1, order="F")


def unvec(v, d):
    """Inverse of :func:`vec` for a d x d matrix."""
    return np.asarray(v, dtype=complex).reshape((d, d), order="F")


def hermitian_encode(x):
    """Isometric real encoding of a Hermitian matrix.

    Maps Hermitian d x d matrices to real vectors of length d^2 preserving
    the Hilbert-Schmidt inner product, so rank decisions over Hermitian
    spans can be made with a real SVD without leaving the Hermitian cone.
    """
    x = np.asarray(x)
    d = x.shape[0]
    iu = np.triu_indices(d, k=1)
    return np.concatenate(
        [
            x.diagonal().real,
            np.sqrt(2.0) * x[iu].real,
            np.sqrt(2.0) * x[iu].imag,
        ]
    )


def hermitian_decode(v, d):
    """Inverse of :func:`hermitian_encode`."""
    v = np.asarray(v, dtype=float)
    x = np.zeros((d, d), dtype=complex)
    iu = np.triu_indices(d, k=1)
    n_off = iu[0].size
    x[np.diag_indices(d)] = v[:d]
    upper = (v[d : d + n_off] + 1j * v[d + n_off :]) / np.sqrt(2.0)
    x[iu] = upper
    x[(iu[1], iu[0])] = upper.conj()
    return x


def hermitian_span_basis(mats, tol=DEFAULT_TOL):
    """Orthonormal Hermitian basis of the real span of Hermitian matrices.

    Parameters
    ----------
    mats : sequence of Hermitian (d, d) arrays
    tol : Tolerance
        rank_tol decides which singular directions are kept.

    Returns
    -------
    list of (d, d) Hermitian ndarrays, orthonormal in the Hilbert-Schmidt
    inner product.
    """
    mats = list(mats)
    if not mats:
        return []
    d = mats[0].shape[0]
    stacked = np.column_stack([hermitian_encode(m) for m in mats])
    u, s, _ = np.linalg.svd(stacked, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return []
    rank = int(np.sum(s >= tol.rank_tol * s[0]))
    return [hermitian_decode(u[:, i], d) for i in range(rank)]
