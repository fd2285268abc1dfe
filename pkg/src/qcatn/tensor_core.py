"""Dense complex operators on labeled site factors.

Every operator carries its support as an ordered tuple of :class:`SiteLabel`
objects. The order is canonical: the physical block (row-major coordinates)
followed by the ancilla block. Constructors permute incoming data into that
order, so two operators on the same label set always share a factor order.
"""

from __future__ import annotations

import itertools
import os
from functools import reduce
from typing import Iterable, NamedTuple, Sequence

import numpy as np

EPS_NUM = 1e-9
DEFAULT_DENSE_CAP = 2**14
DENSE_CAP_ENV = "QCATN_DENSE_CAP"

PHYSICAL = "physical"
ANCILLA = "ancilla"


class DenseCapError(ValueError):
    """Raised when a dense operator would exceed the configured dimension cap."""


class SiteLabel(NamedTuple):
    coord: tuple[int, ...]
    kind: str = PHYSICAL

    def sort_key(self):
        return (self.kind != PHYSICAL, self.coord)

    def __repr__(self):
        mark = "'" if self.kind == ANCILLA else ""
        body = ",".join(map(str, self.coord))
        return f"{body}{mark}"


def phys(coord) -> SiteLabel:
    return SiteLabel(_as_coord(coord), PHYSICAL)


def anc(coord) -> SiteLabel:
    return SiteLabel(_as_coord(coord), ANCILLA)


def _as_coord(coord) -> tuple[int, ...]:
    if isinstance(coord, SiteLabel):
        return coord.coord
    if isinstance(coord, (int, np.integer)):
        return (int(coord),)
    return tuple(int(x) for x in coord)


def as_labels(items: Iterable) -> tuple[SiteLabel, ...]:
    """Coerce coordinates (taken as physical) and labels to labels."""
    out = []
    for item in items:
        if isinstance(item, SiteLabel):
            out.append(item)
        elif isinstance(item, tuple) and len(item) == 2 and item[1] in (PHYSICAL, ANCILLA):
            out.append(SiteLabel(_as_coord(item[0]), item[1]))
        else:
            out.append(phys(item))
    return tuple(out)


def canonical(labels: Iterable[SiteLabel]) -> tuple[SiteLabel, ...]:
    return tuple(sorted(labels, key=SiteLabel.sort_key))


def dense_cap() -> int:
    value = os.environ.get(DENSE_CAP_ENV)
    return int(value) if value else DEFAULT_DENSE_CAP


def check_cap(dim: int):
    cap = dense_cap()
    if dim > cap:
        raise DenseCapError(
            f"dense dimension {dim} exceeds the cap {cap} (set {DENSE_CAP_ENV} to raise it)"
        )


def _permute_factors(data: np.ndarray, dims: Sequence[int], perm: Sequence[int], square: bool):
    n = len(dims)
    if list(perm) == list(range(n)):
        return data
    new_dims = [dims[p] for p in perm]
    if square:
        t = data.reshape(list(dims) * 2)
        t = t.transpose(list(perm) + [p + n for p in perm])
        D = int(np.prod(new_dims))
        return t.reshape(D, D)
    tail = data.shape[1:]
    t = data.reshape(list(dims) + list(tail))
    t = t.transpose(list(perm) + list(range(n, n + len(tail))))
    return t.reshape((int(np.prod(new_dims)),) + tail)


class DenseOperator:
    """A square complex matrix acting on ``support``.

    Row and column indices factor over ``support`` in order, with the first
    label as the most significant digit.
    """

    __slots__ = ("support", "dims", "data")

    def __init__(self, support, data, dims=None):
        support = as_labels(support)
        if dims is None:
            dims = _infer_dims(len(support), np.shape(data)[0])
        dims = tuple(int(x) for x in dims)
        if len(dims) != len(support):
            raise ValueError("dims and support differ in length")
        if len(set(support)) != len(support):
            raise ValueError("support labels must be distinct")
        D = int(np.prod(dims)) if dims else 1
        check_cap(D)
        data = np.asarray(data, dtype=complex)
        if data.shape != (D, D):
            raise ValueError(f"data shape {data.shape} does not match dims {dims}")
        order = sorted(range(len(support)), key=lambda i: support[i].sort_key())
        data = _permute_factors(data, dims, order, square=True)
        self.support = tuple(support[i] for i in order)
        self.dims = tuple(dims[i] for i in order)
        self.data = data

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def __repr__(self):
        return f"DenseOperator(support={list(self.support)}, dim={self.dim})"

    # algebra on a shared support
    def _coerce(self, other) -> "DenseOperator":
        if not isinstance(other, DenseOperator):
            return NotImplemented
        if other.support != self.support:
            union = canonical(set(self.support) | set(other.support))
            raise ValueError(
                f"supports differ ({list(self.support)} vs {list(other.support)}); "
                f"embed both on {list(union)} first"
            )
        return other

    def __add__(self, other):
        other = self._coerce(other)
        return DenseOperator(self.support, self.data + other.data, self.dims)

    def __sub__(self, other):
        other = self._coerce(other)
        return DenseOperator(self.support, self.data - other.data, self.dims)

    def __matmul__(self, other):
        other = self._coerce(other)
        return DenseOperator(self.support, self.data @ other.data, self.dims)

    def __mul__(self, scalar):
        return DenseOperator(self.support, self.data * scalar, self.dims)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return DenseOperator(self.support, self.data / scalar, self.dims)

    def dag(self) -> "DenseOperator":
        return DenseOperator(self.support, self.data.conj().T, self.dims)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    # predicates
    def is_hermitian(self, tol: float = EPS_NUM) -> bool:
        scale = max(1.0, self.norm())
        return float(np.linalg.norm(self.data - self.data.conj().T)) <= tol * scale

    def is_psd(self, tol: float = EPS_NUM) -> bool:
        if not self.is_hermitian(tol):
            return False
        h = (self.data + self.data.conj().T) / 2
        scale = max(1.0, float(np.abs(np.trace(h))))
        if self.dim <= 1024:
            return bool(np.linalg.eigvalsh(h)[0] >= -tol * scale)
        # a Cholesky factorization of h + tol*I exists iff h >= -tol*I
        try:
            np.linalg.cholesky(h + tol * scale * np.eye(self.dim))
        except np.linalg.LinAlgError:
            return False
        return True

    def is_unitary(self, tol: float = EPS_NUM) -> bool:
        err = np.linalg.norm(self.data.conj().T @ self.data - np.eye(self.dim))
        return float(err) <= tol * np.sqrt(self.dim)

    # structure
    def label_dims(self) -> dict[SiteLabel, int]:
        return dict(zip(self.support, self.dims))

    def partial_trace(self, labels: Iterable) -> "DenseOperator":
        return partial_trace(self, labels)

    def reduce_to(self, labels: Iterable) -> "DenseOperator":
        keep = set(as_labels(labels))
        missing = keep - set(self.support)
        if missing:
            raise ValueError(f"labels {sorted(missing)} not in support")
        return partial_trace(self, [s for s in self.support if s not in keep])

    def embed(self, support: Iterable, dims: dict | int | None = None) -> "DenseOperator":
        """Tensor with identities up to ``support`` (a superset of the current one)."""
        support = canonical(as_labels(support))
        extra = [s for s in support if s not in set(self.support)]
        if len(extra) + len(self.support) != len(support):
            raise ValueError("target support must contain the current support")
        if not extra:
            return self
        if dims is None:
            dims = self.dims[0] if self.dims else 2
        get = (lambda s: dims[s]) if isinstance(dims, dict) else (lambda s: dims)
        ident = identity(extra, [get(s) for s in extra])
        return tensor_product(self, ident)

    def permuted(self, order: Sequence) -> np.ndarray:
        """Matrix data re-factored in an arbitrary label order (not canonical)."""
        order = as_labels(order)
        pos = {s: i for i, s in enumerate(self.support)}
        perm = [pos[s] for s in order]
        return _permute_factors(self.data, self.dims, perm, square=True)

    # serialization
    def to_json(self) -> dict:
        return {
            "support": [[list(s.coord), s.kind] for s in self.support],
            "dims": list(self.dims),
            "re": self.data.real.tolist(),
            "im": self.data.imag.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DenseOperator":
        support = []
        for item in obj["support"]:
            if isinstance(item, list) and len(item) == 2 and isinstance(item[1], str):
                support.append(SiteLabel(_as_coord(item[0]), item[1]))
            else:
                support.append(phys(item))
        data = np.asarray(obj["re"], dtype=float)
        if "im" in obj:
            data = data + 1j * np.asarray(obj["im"], dtype=float)
        return cls(support, data, obj.get("dims"))


class LowRankOperator:
    """Positive operator ``F @ F^dagger`` kept in factored form.

    Partial traces act on the factor only, so reduced states of large pure or
    low-rank states never need the full square matrix.
    """

    __slots__ = ("support", "dims", "factor")

    def __init__(self, support, factor, dims=None):
        support = as_labels(support)
        factor = np.asarray(factor, dtype=complex)
        if factor.ndim == 1:
            factor = factor[:, None]
        if dims is None:
            dims = _infer_dims(len(support), factor.shape[0])
        dims = tuple(int(x) for x in dims)
        if int(np.prod(dims)) != factor.shape[0]:
            raise ValueError("factor rows do not match dims")
        order = sorted(range(len(support)), key=lambda i: support[i].sort_key())
        factor = _permute_factors(factor, dims, order, square=False)
        self.support = tuple(support[i] for i in order)
        self.dims = tuple(dims[i] for i in order)
        self.factor = factor

    @property
    def dim(self) -> int:
        return self.factor.shape[0]

    @property
    def rank(self) -> int:
        return self.factor.shape[1]

    def __repr__(self):
        return f"LowRankOperator(support={list(self.support)}, dim={self.dim}, rank={self.rank})"

    def __mul__(self, scalar):
        scalar = float(scalar)
        if scalar < 0:
            raise ValueError("LowRankOperator only scales by non-negative reals")
        return LowRankOperator(self.support, self.factor * np.sqrt(scalar), self.dims)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def trace(self) -> float:
        return float(np.vdot(self.factor, self.factor).real)

    def to_dense(self) -> DenseOperator:
        return DenseOperator(self.support, self.factor @ self.factor.conj().T, self.dims)

    def eigvals(self) -> np.ndarray:
        """Non-zero spectrum (descending), from the singular values of the factor."""
        if self.factor.size == 0:
            return np.zeros(0)
        if self.rank <= self.dim:
            gram = self.factor.conj().T @ self.factor
            w = np.linalg.eigvalsh(gram)
        else:
            w = np.linalg.eigvalsh(self.factor @ self.factor.conj().T)
        return np.clip(w[::-1], 0.0, None)

    def partial_trace(self, labels: Iterable) -> "LowRankOperator":
        traced = set(as_labels(labels))
        _check_subset(traced, self.support)
        keep = [i for i, s in enumerate(self.support) if s not in traced]
        gone = [i for i, s in enumerate(self.support) if s in traced]
        t = self.factor.reshape(list(self.dims) + [self.rank])
        t = t.transpose(keep + gone + [len(self.dims)])
        dk = int(np.prod([self.dims[i] for i in keep])) if keep else 1
        G = t.reshape(dk, -1)
        if G.shape[1] > G.shape[0]:
            # compress to at most dk columns: G G^dag = L L^dag
            w, v = np.linalg.eigh(G @ G.conj().T)
            w = np.clip(w, 0.0, None)
            nz = w > 0
            G = v[:, nz] * np.sqrt(w[nz])
        return LowRankOperator(
            [self.support[i] for i in keep], G, [self.dims[i] for i in keep]
        )

    def reduce_to(self, labels: Iterable) -> "LowRankOperator":
        keep = set(as_labels(labels))
        _check_subset(keep, self.support)
        return self.partial_trace([s for s in self.support if s not in keep])


def _infer_dims(n_labels: int, D: int) -> tuple[int, ...]:
    if n_labels == 0:
        return ()
    d = round(D ** (1.0 / n_labels))
    if d**n_labels != D:
        raise ValueError(f"cannot infer uniform local dimension for size {D}")
    return (d,) * n_labels


def _check_subset(labels, support):
    missing = set(labels) - set(support)
    if missing:
        raise ValueError(f"labels {sorted(missing, key=SiteLabel.sort_key)} are not in the support")


def identity(support: Iterable, dims: Sequence[int] | int = 2) -> DenseOperator:
    support = as_labels(support)
    if isinstance(dims, int):
        dims = [dims] * len(support)
    D = int(np.prod(dims)) if len(dims) else 1
    return DenseOperator(support, np.eye(D, dtype=complex), dims)


def tensor_product(P: DenseOperator, Q: DenseOperator) -> DenseOperator:
    overlap = set(P.support) & set(Q.support)
    if overlap:
        raise ValueError(f"supports overlap on {sorted(overlap, key=SiteLabel.sort_key)}")
    return DenseOperator(P.support + Q.support, np.kron(P.data, Q.data), P.dims + Q.dims)


def tensor_all(ops: Iterable[DenseOperator]) -> DenseOperator:
    return reduce(tensor_product, ops)


def partial_trace(P: DenseOperator, labels: Iterable) -> DenseOperator:
    """Trace out ``labels`` from ``P``; the result keeps canonical order."""
    traced = set(as_labels(labels))
    _check_subset(traced, P.support)
    if not traced:
        return P
    n = len(P.support)
    keep = [i for i, s in enumerate(P.support) if s not in traced]
    gone = [i for i, s in enumerate(P.support) if s in traced]
    dk = int(np.prod([P.dims[i] for i in keep])) if keep else 1
    dt = int(np.prod([P.dims[i] for i in gone]))
    t = P.data.reshape(list(P.dims) * 2)
    t = t.transpose(keep + gone + [i + n for i in keep] + [i + n for i in gone])
    t = t.reshape(dk, dt, dk, dt)
    out = np.einsum("ajbj->ab", t)
    return DenseOperator([P.support[i] for i in keep], out, [P.dims[i] for i in keep])


class Eigh(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def eigh(P: DenseOperator, tol: float = EPS_NUM) -> Eigh:
    """Spectrum of a Hermitian operator, eigenvalues in descending order."""
    if not P.is_hermitian(tol):
        raise ValueError("eigh needs a Hermitian operator")
    h = (P.data + P.data.conj().T) / 2
    w, v = np.linalg.eigh(h)
    return Eigh(w[::-1].copy(), v[:, ::-1].copy())


def op_norm_inf(P: DenseOperator) -> float:
    return float(np.linalg.norm(P.data, 2))


def relative_residual(X: np.ndarray, Y: np.ndarray, scale: float | None = None) -> float:
    """``||X - Y||_F / scale`` where scale defaults to ``||X||_F``; 0 for an all-zero pair."""
    diff = float(np.linalg.norm(X - Y))
    if scale is None:
        scale = float(np.linalg.norm(X))
    if scale == 0.0:
        return 0.0 if diff == 0.0 else float("inf")
    return diff / scale


# generalized Pauli (Heisenberg-Weyl) operators


def shift_clock(d: int) -> tuple[np.ndarray, np.ndarray]:
    X = np.roll(np.eye(d), 1, axis=0).astype(complex)
    Z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return X, Z


def weyl_basis(d: int) -> list[np.ndarray]:
    """The ``d**2`` operators ``X^a Z^b``; all but the identity are traceless."""
    X, Z = shift_clock(d)
    out = []
    for a in range(d):
        for b in range(d):
            out.append(np.linalg.matrix_power(X, a) @ np.linalg.matrix_power(Z, b))
    return out


def weyl_basis_on(labels: Sequence, d: int) -> Iterable[DenseOperator]:
    """Tensor-product Heisenberg-Weyl basis on several sites (lazy)."""
    labels = canonical(as_labels(labels))
    local = weyl_basis(d)
    for combo in itertools.product(local, repeat=len(labels)):
        data = reduce(np.kron, combo, np.eye(1, dtype=complex))
        yield DenseOperator(labels, data, [d] * len(labels))


PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def local_op(site, matrix, kind: str = PHYSICAL) -> DenseOperator:
    matrix = np.asarray(matrix, dtype=complex)
    return DenseOperator([SiteLabel(_as_coord(site), kind)], matrix, [matrix.shape[0]])


def apply_local(vector: np.ndarray, support: Sequence[SiteLabel], dims: Sequence[int],
                op: DenseOperator) -> np.ndarray:
    """Apply ``op`` to a state vector factored over ``support`` without densifying."""
    pos = {s: i for i, s in enumerate(support)}
    axes = [pos[s] for s in op.support]
    k = len(axes)
    t = vector.reshape(dims)
    m = op.data.reshape(list(op.dims) * 2)
    t = np.tensordot(m, t, axes=(list(range(k, 2 * k)), axes))
    # tensordot puts the op's output legs first; move them back into place
    rest = [i for i in range(len(dims)) if i not in axes]
    order = [0] * len(dims)
    for j, ax in enumerate(axes):
        order[ax] = j
    for j, ax in enumerate(rest):
        order[ax] = k + j
    return t.transpose(order).reshape(-1)
