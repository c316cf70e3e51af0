"""Shared generators and independent oracles for the test suite.

Everything here is deliberately implemented from first principles (classical
graph reachability, stationary laws via least squares, support iteration)
so the tests never reuse the library code paths they are checking.
"""

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

import chanstruct as cs

_PAULIS = [
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]


def haar_unitary(n, rng):
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_kraus_family(d, k, rng):
    """A Haar-random trace-preserving Kraus family: vertical blocks of a
    random isometry C^d -> C^(dk)."""
    z = rng.standard_normal((d * k, d)) + 1j * rng.standard_normal((d * k, d))
    q, _ = np.linalg.qr(z)
    return [q[i * d : (i + 1) * d, :] for i in range(k)]


def random_channel(d, k, rng):
    return cs.KrausChannel(random_kraus_family(d, k, rng))


def random_state(d, rng):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = z @ z.conj().T
    return rho / np.trace(rho).real


def bloch_vector(rho):
    """Standard Bloch coordinates u_i = Tr(pauli_i rho) of a qubit state."""
    return np.array([np.trace(p @ rho).real for p in _PAULIS])


def amplitude_damping_channel(p):
    """Qubit amplitude damping: V1 = sqrt(p)|e1><e2|, V2 = diag(1, sqrt(1-p)).

    Population decays from e2 into e1 at rate p; e1 is absorbing."""
    v1 = np.sqrt(p) * np.array([[0.0, 1.0], [0.0, 0.0]])
    v2 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - p)]])
    return cs.KrausChannel([v1, v2])


def amplitude_damping_apply(rho, p):
    """Closed-form action of the amplitude damping channel."""
    return np.array(
        [
            [rho[0, 0] + p * rho[1, 1], np.sqrt(1.0 - p) * rho[0, 1]],
            [np.sqrt(1.0 - p) * rho[1, 0], (1.0 - p) * rho[1, 1]],
        ],
        dtype=complex,
    )


# ---------------------------------------------------------------------------
# classical chains


def planted_markov(rng, max_states=8):
    """Column-stochastic matrix with planted recurrent classes and transient
    states.  Returns (P, recurrent classes as index lists, transient indices).
    """
    n_classes = int(rng.integers(1, 4))
    sizes = [int(rng.integers(1, 4)) for _ in range(n_classes)]
    while sum(sizes) > max_states - 1:
        sizes = sizes[:-1]
    n_rec = sum(sizes)
    n_tr = int(rng.integers(0, max_states - n_rec + 1))
    n = n_rec + n_tr
    p = np.zeros((n, n))
    start = 0
    classes = []
    for size in sizes:
        idx = list(range(start, start + size))
        classes.append(idx)
        block = rng.uniform(0.1, 1.0, size=(size, size))
        block /= block.sum(axis=0, keepdims=True)
        p[np.ix_(idx, idx)] = block
        start += size
    for j in range(n_rec, n):
        col = rng.uniform(0.0, 1.0, size=n)
        # guarantee leakage into the recurrent part so j is truly transient
        col[int(rng.integers(0, n_rec))] += 1.0
        p[:, j] = col / col.sum()
    return p, classes, list(range(n_rec, n))


def classical_recurrent_classes(p):
    """Closed communication classes of the chain, by strong components of
    the digraph with an edge j -> i whenever p[i, j] > 0."""
    n = p.shape[0]
    adj = csr_matrix((p.T > 0).astype(int))
    n_comp, labels = connected_components(
        adj, directed=True, connection="strong"
    )
    classes = []
    transient = []
    for c in range(n_comp):
        members = [i for i in range(n) if labels[i] == c]
        outside = [i for i in range(n) if labels[i] != c]
        closed = not (outside and np.any(p[np.ix_(outside, members)] > 0))
        (classes if closed else transient).append(members)
    flat_transient = sorted(t for grp in transient for t in grp)
    return sorted(classes, key=min), flat_transient


def stationary_law(p_block):
    """Stationary distribution of an irreducible column-stochastic block."""
    n = p_block.shape[0]
    a = np.vstack([p_block - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    return x


def coordinate_projector(n, indices):
    p = np.zeros((n, n))
    for i in indices:
        p[i, i] = 1.0
    return p


# ---------------------------------------------------------------------------
# planted quantum structure


def planted_channel(rng, alpha_dims, beta_specs, n_transient, n_kraus=3):
    """Random unitary conjugation of a direct sum of irreducible blocks.

    ``alpha_dims`` lists dimensions of isolated irreducible summands;
    ``beta_specs`` lists (dim, copies) pairs, each contributing
    Id_copies (x) W_i for a random irreducible family W; ``n_transient``
    appends a generically-fed transient corner.  Returns (channel, truth)
    where truth records the planted counts and the conjugating unitary.
    """
    blocks = []
    for dim in alpha_dims:
        blocks.append(random_kraus_family(dim, n_kraus, rng))
    for dim, copies in beta_specs:
        fam = random_kraus_family(dim, n_kraus, rng)
        blocks.append([np.kron(np.eye(copies), v) for v in fam])
    dims = [b[0].shape[0] for b in blocks]
    d_rec = sum(dims)
    big = []
    for i in range(n_kraus):
        v = np.zeros((d_rec, d_rec), dtype=complex)
        offset = 0
        for b, dim in zip(blocks, dims):
            v[offset : offset + dim, offset : offset + dim] = b[i]
            offset += dim
        big.append(v)
    d = d_rec + n_transient
    if n_transient:
        # the stacked Kraus matrix must be an isometry; its first d_rec
        # columns are fixed by the recurrent family, the remaining columns
        # are a random orthonormal completion
        first_cols = np.zeros((d * n_kraus, d_rec), dtype=complex)
        for i in range(n_kraus):
            first_cols[i * d : i * d + d_rec, :] = big[i]
        g = rng.standard_normal((d * n_kraus, n_transient)) + (
            1j * rng.standard_normal((d * n_kraus, n_transient))
        )
        g -= first_cols @ (first_cols.conj().T @ g)
        q, _ = np.linalg.qr(g)
        kraus = []
        for i in range(n_kraus):
            v = np.zeros((d, d), dtype=complex)
            v[:d_rec, :d_rec] = big[i]
            v[:, d_rec:] = q[i * d : (i + 1) * d, :]
            kraus.append(v)
    else:
        kraus = big
    u = haar_unitary(d, rng)
    truth = {
        "dim": d,
        "n_alpha": len(alpha_dims),
        "beta_sizes": sorted(copies for _, copies in beta_specs),
        "d_transient": n_transient,
        "fixed_dim": len(alpha_dims)
        + sum(copies * copies for _, copies in beta_specs),
        "unitary": u,
    }
    return cs.KrausChannel([u @ v @ u.conj().T for v in kraus]), truth


# ---------------------------------------------------------------------------
# support-closure oracle


def support_closure(ch, x, tol=1e-9):
    """Smallest enclosure containing x, via the accumulated-support
    iteration: the support of sum_k Phi^k(|x><x|) stabilizes at the
    enclosure generated by x."""
    d = ch.dim
    rho0 = np.outer(x, np.conj(x))
    rho0 = rho0 / np.trace(rho0).real
    sigma = rho0.copy()
    prev_dim = -1
    w, v = np.linalg.eigh(sigma)
    mask = w >= tol * w[-1]
    for _ in range(d + 2):
        w, v = np.linalg.eigh((sigma + sigma.conj().T) / 2.0)
        mask = w >= tol * w[-1]
        if int(mask.sum()) == prev_dim:
            break
        prev_dim = int(mask.sum())
        sigma = rho0 + cs.apply(ch, sigma)
        sigma = sigma / np.trace(sigma).real
    return cs.Subspace(d, v[:, mask])
