"""Completely positive trace-preserving maps in Kraus form.

Channels act in the Schrodinger picture as ``rho -> sum_i K_i rho K_i*``
and in the Heisenberg picture as ``B -> sum_i K_i* B K_i``.  Equality of
channels is decided on Choi matrices, which are independent of the Kraus
representation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError, ValidationError
from .operators import (
    DEFAULT_TOL,
    check_state_vector,
    dagger,
    frobenius_norm,
    is_projection,
    is_unitary,
)


@dataclass(frozen=True)
class Channel:
    """Channel on a ``dim``-dimensional space, given by Kraus operators."""

    dim: int
    kraus: tuple

    def __len__(self) -> int:
        return len(self.kraus)


@dataclass(frozen=True)
class StinespringDilation:
    """Isometry ``w: H -> H (x) K`` with ``E(T) = tr_K(w T w*)``."""

    dim_k: int
    w: np.ndarray


def make_channel(kraus, tol: float = DEFAULT_TOL) -> Channel:
    """Validate trace preservation ``sum_i K_i* K_i = I`` and build a channel."""
    mats = [np.asarray(k, dtype=complex) for k in kraus]
    if not mats:
        raise ValidationError("channel needs at least one Kraus operator")
    dim = mats[0].shape[0]
    for k in mats:
        if k.shape != (dim, dim):
            raise DimensionError(f"Kraus operator shape {k.shape}, expected {(dim, dim)}")
    total = sum(dagger(k) @ k for k in mats)
    residual = frobenius_norm(total - np.eye(dim))
    if residual > tol * max(1.0, float(np.sqrt(dim))):
        raise ValidationError(f"Kraus operators are not trace-preserving (residual {residual:.3e})")
    frozen = []
    for k in mats:
        k = k.copy()
        k.setflags(write=False)
        frozen.append(k)
    return Channel(dim=dim, kraus=tuple(frozen))


def identity_channel(dim: int) -> Channel:
    return make_channel([np.eye(dim, dtype=complex)])


def unitary_channel(u: np.ndarray, tol: float = DEFAULT_TOL) -> Channel:
    """Conjugation by a unitary; the single-Kraus reversible channel."""
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u, tol):
        raise ValidationError("matrix is not unitary")
    return make_channel([u], tol)


def complete_contraction(phi: np.ndarray) -> Channel:
    """Channel mapping every state to the fixed pure state ``|phi><phi|``."""
    phi = check_state_vector(phi)
    dim = phi.shape[0]
    kraus = [np.outer(phi, np.eye(dim)[i]) for i in range(dim)]
    return make_channel(kraus)


def apply(c: Channel, x: np.ndarray, picture: str = "schrodinger") -> np.ndarray:
    """Apply the channel to an operator in either picture."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (c.dim, c.dim):
        raise DimensionError(f"operator shape {x.shape}, expected {(c.dim, c.dim)}")
    if picture == "schrodinger":
        return sum(k @ x @ dagger(k) for k in c.kraus)
    if picture == "heisenberg":
        return sum(dagger(k) @ x @ k for k in c.kraus)
    raise ValueError(f"picture must be 'schrodinger' or 'heisenberg', got {picture!r}")


def compose(second: Channel, first: Channel) -> Channel:
    """Concatenation ``second o first`` (``first`` acts first)."""
    if second.dim != first.dim:
        raise DimensionError(f"dimension mismatch: {second.dim} vs {first.dim}")
    return make_channel([s @ f for s in second.kraus for f in first.kraus])


def choi_matrix(c: Channel) -> np.ndarray:
    """Choi matrix ``C[(r,s),(r',s')] = <r| E(|s><s'|) |r'>``.

    Positive semidefinite, trace ``dim``, and independent of the Kraus
    representation.
    """
    vecs = np.stack([k.ravel() for k in c.kraus])
    return vecs.T @ vecs.conj()


def channel_distance(a: Channel, b: Channel) -> float:
    """Frobenius distance between Choi matrices; zero iff equal as maps."""
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return frobenius_norm(choi_matrix(a) - choi_matrix(b))


def kraus_from_choi(choi: np.ndarray, dim: int, cutoff: float = 1e-12) -> list:
    """Canonical (linearly independent) Kraus set from a Choi matrix.

    Eigenvectors with eigenvalue below ``cutoff`` times the largest are
    discarded, which removes numerically redundant Kraus directions.
    """
    eigvals, vecs = np.linalg.eigh((choi + dagger(choi)) / 2)
    top = float(eigvals.max())
    kraus = []
    for lam, v in zip(eigvals, vecs.T):
        if lam > cutoff * max(top, 1.0):
            kraus.append(np.sqrt(lam) * v.reshape(dim, dim))
    return kraus


def minimal_kraus(c: Channel) -> list:
    """Canonical minimal Kraus representation of a channel."""
    return kraus_from_choi(choi_matrix(c), c.dim)


def _projector_family(dim: int):
    """Rank-1 projectors whose complex span is all of ``L(H)``."""
    eye = np.eye(dim, dtype=complex)
    vectors = [eye[i] for i in range(dim)]
    for i in range(dim):
        for j in range(i + 1, dim):
            vectors.append((eye[i] + eye[j]) / np.sqrt(2))
            vectors.append((eye[i] + 1j * eye[j]) / np.sqrt(2))
    return [np.outer(v, v.conj()) for v in vectors]


def is_multiplicative(c: Channel, tol: float = DEFAULT_TOL) -> bool:
    """Heisenberg-picture multiplicativity, decided on projections.

    The dual of a multiplicative channel maps projections to projections;
    conversely, projection preservation on a family of rank-1 projectors
    spanning ``L(H)`` forces multiplicativity.  Only the spanning family
    is tested.
    """
    return all(
        is_projection(apply(c, p, "heisenberg"), tol) for p in _projector_family(c.dim)
    )


def multiplicativity_residual(c: Channel) -> float:
    """Largest projection defect of dual images over the spanning family."""
    worst = 0.0
    for p in _projector_family(c.dim):
        image = apply(c, p, "heisenberg")
        worst = max(worst, frobenius_norm(image @ image - image))
    return worst


def is_extreme_channel(c: Channel, tol: float = DEFAULT_TOL) -> bool:
    """Extremality via linear independence of ``{K_i* K_j}``.

    Evaluated on the canonical minimal Kraus set, so Kraus-representation
    gauge and numerically redundant operators do not affect the verdict.
    """
    kraus = minimal_kraus(c)
    m = len(kraus)
    if m * m > c.dim * c.dim:
        return False
    columns = [(dagger(a) @ b).ravel() for a in kraus for b in kraus]
    system = np.column_stack(columns)
    return int(np.linalg.matrix_rank(system)) == m * m


def stinespring_dilation(c: Channel) -> StinespringDilation:
    """Dilation ``w = sum_i K_i (x) |i>`` with ``dim K`` = number of Kraus ops."""
    arr = np.stack(c.kraus)  # (m, d, d)
    m, d, _ = arr.shape
    w = arr.transpose(1, 0, 2).reshape(d * m, d)
    return StinespringDilation(dim_k=m, w=w)


def stinespring_commutant_residual(c: Channel) -> float:
    """Largest ``||[B (x) I, W W*]||_F`` over a basis of ``L(H)``.

    Vanishes exactly when the channel is multiplicative (i.e. unitary).
    """
    dil = stinespring_dilation(c)
    ww = dil.w @ dagger(dil.w)
    d, m = c.dim, dil.dim_k
    worst = 0.0
    for a in range(d):
        for b in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[a, b] = 1.0
            big = np.kron(unit, np.eye(m))
            worst = max(worst, frobenius_norm(big @ ww - ww @ big))
    return worst


def random_channel(dim: int, n_kraus: int, seed: int) -> Channel:
    """Random channel with ``n_kraus`` Kraus operators, deterministic per seed."""
    rng = np.random.default_rng(seed)
    raw = [
        rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        for _ in range(n_kraus)
    ]
    total = sum(dagger(g) @ g for g in raw)
    eigvals, vecs = np.linalg.eigh(total)
    inv_sqrt = (vecs / np.sqrt(eigvals)) @ dagger(vecs)
    return make_channel([g @ inv_sqrt for g in raw])
