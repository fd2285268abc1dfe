"""Quantum channels on a lattice, held through their Choi-Jamiolkowski state.

The CJS ``R`` lives on the physical sites ``V`` followed by the ancilla copy
``V'``.  It can be stored densely, or as a factor ``F`` with ``R = F F^dagger``
whose columns are vectorized Kraus operators.  The factored form keeps unitary
and other low-rank channels cheap on lattices where the dense ``R`` would not
fit in memory.
"""

from __future__ import annotations

import itertools
from functools import cached_property, reduce
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import unitary_group

from .lattice import PERIODIC, Lattice
from .tensor_core import (
    EPS_NUM,
    PAULI,
    DenseOperator,
    LowRankOperator,
    SiteLabel,
    anc,
    apply_local,
    as_labels,
    canonical,
    check_cap,
    identity,
    partial_trace,
    phys,
    tensor_all,
)


class ChannelError(ValueError):
    pass


def physical_labels(lat: Lattice) -> tuple[SiteLabel, ...]:
    return tuple(phys(s) for s in lat.sites)


def ancilla_labels(lat: Lattice) -> tuple[SiteLabel, ...]:
    return tuple(anc(s) for s in lat.sites)


def doubled_labels(lat: Lattice) -> tuple[SiteLabel, ...]:
    return physical_labels(lat) + ancilla_labels(lat)


class Channel:
    """Trace-preserving completely positive map on the sites of ``lattice``.

    Build channels through :func:`cjs_from_kraus`, :func:`from_cjs` or the
    named constructors below rather than calling this directly.
    """

    def __init__(self, lattice: Lattice, *, cjs: DenseOperator | None = None,
                 kraus: Sequence[np.ndarray] | None = None, name: str = "channel",
                 meta: dict | None = None):
        if cjs is None and kraus is None:
            raise ChannelError("a channel needs a CJS or a Kraus family")
        self.lattice = lattice
        self.name = name
        self.meta = dict(meta or {})
        self._cjs = cjs
        self._kraus = None if kraus is None else [np.asarray(k, dtype=complex) for k in kraus]

    def __repr__(self):
        return f"Channel({self.name!r}, lattice={self.lattice.to_dict()})"

    @property
    def d(self) -> int:
        return self.lattice.d

    @property
    def dim(self) -> int:
        return self.lattice.d**self.lattice.N

    @property
    def V(self) -> tuple[SiteLabel, ...]:
        return physical_labels(self.lattice)

    @property
    def V_anc(self) -> tuple[SiteLabel, ...]:
        return ancilla_labels(self.lattice)

    @property
    def has_kraus(self) -> bool:
        return self._kraus is not None

    @cached_property
    def cjs(self) -> DenseOperator:
        if self._cjs is not None:
            return self._cjs
        check_cap(self.dim**2)
        F = self.factor.factor
        return DenseOperator(doubled_labels(self.lattice), F @ F.conj().T, [self.d] * (2 * self.lattice.N))

    @cached_property
    def kraus_arrays(self) -> list[np.ndarray]:
        if self._kraus is not None:
            return self._kraus
        w, v = np.linalg.eigh((self._cjs.data + self._cjs.data.conj().T) / 2)
        cut = EPS_NUM * max(1.0, float(w[-1]))
        out = []
        for lam, vec in zip(w[::-1], v[:, ::-1].T):
            if lam <= cut:
                break
            out.append(np.sqrt(lam) * vec.reshape(self.dim, self.dim))
        return out

    @property
    def kraus(self) -> list[DenseOperator]:
        dims = [self.d] * self.lattice.N
        return [DenseOperator(self.V, k, dims) for k in self.kraus_arrays]

    @cached_property
    def factor(self) -> LowRankOperator:
        cols = np.stack([k.reshape(-1) for k in self.kraus_arrays], axis=1)
        return LowRankOperator(doubled_labels(self.lattice), cols, [self.d] * (2 * self.lattice.N))

    @property
    def kraus_rank(self) -> int:
        return len(self.kraus_arrays)

    def _prefer_factor(self) -> bool:
        return self._kraus is not None or self._cjs is None

    @cached_property
    def _heisenberg_matrix(self) -> np.ndarray:
        # E^dag(X)[a, b] = sum_{ij} X[j, i] R[(i, b), (j, a)]
        D = self.dim
        R4 = self.cjs.data.reshape(D, D, D, D)
        return np.ascontiguousarray(R4.transpose(2, 0, 3, 1).reshape(D * D, D * D))

    @cached_property
    def _schrodinger_matrix(self) -> np.ndarray:
        # E(rho)[i, j] = sum_{ab} rho[a, b] R[(i, a), (j, b)]
        D = self.dim
        R4 = self.cjs.data.reshape(D, D, D, D)
        return np.ascontiguousarray(R4.transpose(1, 3, 0, 2).reshape(D * D, D * D))

    def reduced_cjs(self, keep: Iterable) -> DenseOperator:
        """``R`` traced down to the labels in ``keep``."""
        keep = canonical(as_labels(keep))
        if self._prefer_factor():
            return self.factor.reduce_to(keep).to_dense()
        return self.cjs.reduce_to(keep)

    def cjs_spectrum(self) -> np.ndarray:
        """Eigenvalues of ``R`` in descending order (zeros beyond the rank omitted
        for factored channels)."""
        return self._spectrum.copy()

    @cached_property
    def _spectrum(self) -> np.ndarray:
        if self._prefer_factor():
            return np.asarray(self.factor.eigvals())
        return np.linalg.eigvalsh(self.cjs.data)[::-1]

    def _check_on_V(self, op: DenseOperator):
        if set(op.support) != set(self.V):
            raise ChannelError(
                f"operator support {list(op.support)} does not match the lattice sites; "
                "embed it on the full lattice first"
            )

    def apply(self, rho: DenseOperator) -> DenseOperator:
        """Schrodinger action ``E(rho) = tr_{V'}(rho^T_{V'} R)``."""
        self._check_on_V(rho)
        x = rho.data
        if self._prefer_factor() and self.kraus_rank <= self.dim:
            out = sum(k @ x @ k.conj().T for k in self.kraus_arrays)
        else:
            out = (x.reshape(-1) @ self._schrodinger_matrix).reshape(x.shape)
        return DenseOperator(self.V, out, rho.dims)

    def adjoint_apply(self, X: DenseOperator) -> DenseOperator:
        """Heisenberg action, the Hilbert-Schmidt adjoint of :meth:`apply`."""
        self._check_on_V(X)
        x = X.data
        if self._prefer_factor() and self.kraus_rank <= self.dim:
            out = sum(k.conj().T @ x @ k for k in self.kraus_arrays)
        else:
            out = (x.reshape(-1) @ self._heisenberg_matrix).reshape(x.shape)
        return DenseOperator(self.V, out, X.dims)

    def adjoint_apply_many(self, Xs: np.ndarray) -> np.ndarray:
        """:meth:`adjoint_apply` on a stack of full-lattice matrices of shape ``(m, D, D)``."""
        Xs = np.asarray(Xs, dtype=complex)
        if self._prefer_factor() and self.kraus_rank <= self.dim:
            Ks = np.stack(self.kraus_arrays)
            tmp = np.matmul(Xs[:, None], Ks[None])
            return np.einsum("kba,mkbc->mac", Ks.conj(), tmp, optimize=True)
        m, D = Xs.shape[0], self.dim
        return (Xs.reshape(m, D * D) @ self._heisenberg_matrix).reshape(m, D, D)

    def validate(self, tol: float = EPS_NUM, check_psd: bool = True) -> None:
        """Raise :class:`ChannelError` unless ``R = R^dagger >= 0`` and ``tr_V R = 1``."""
        if self._kraus is not None:
            total = sum(k.conj().T @ k for k in self._kraus)
            err = np.linalg.norm(total - np.eye(self.dim))
            if err > tol * np.sqrt(self.dim):
                raise ChannelError(f"Kraus family is not trace preserving (residual {err:.3e})")
            return
        R = self._cjs
        if not R.is_hermitian(tol):
            raise ChannelError("CJS is not Hermitian")
        marg = partial_trace(R, self.V).data
        err = np.linalg.norm(marg - np.eye(self.dim))
        if err > tol * np.sqrt(self.dim):
            raise ChannelError(f"tr_V(R) differs from the identity (residual {err:.3e})")
        if check_psd and not R.is_psd(tol):
            raise ChannelError("CJS is not positive semidefinite")


# constructors


def cjs_from_kraus(lat: Lattice, K: Sequence, name: str = "kraus", meta=None,
                   tol: float = EPS_NUM) -> Channel:
    """Channel with Kraus operators ``K`` (DenseOperators on the full lattice or raw arrays)."""
    V = physical_labels(lat)
    arrays = []
    for k in K:
        if isinstance(k, DenseOperator):
            if set(k.support) != set(V):
                raise ChannelError("Kraus operators must act on the full lattice; embed local ones first")
            arrays.append(k.data)
        else:
            arrays.append(np.asarray(k, dtype=complex))
    dim = lat.d**lat.N
    for a in arrays:
        if a.shape != (dim, dim):
            raise ChannelError(f"Kraus operator of shape {a.shape}, expected {(dim, dim)}")
    ch = Channel(lat, kraus=arrays, name=name, meta=meta)
    ch.validate(tol)
    return ch


def from_cjs(lat: Lattice, R, name: str = "cjs", meta=None, tol: float = EPS_NUM,
             check_psd: bool = True) -> Channel:
    if not isinstance(R, DenseOperator):
        R = DenseOperator(doubled_labels(lat), R, [lat.d] * (2 * lat.N))
    if set(R.support) != set(doubled_labels(lat)):
        raise ChannelError("CJS must be supported on the physical sites and all ancillas")
    ch = Channel(lat, cjs=R, name=name, meta=meta)
    ch.validate(tol, check_psd=check_psd)
    return ch


def max_entangled(lat: Lattice) -> LowRankOperator:
    """Unnormalized ``|Phi> = sum_s |s>_V |s>_V'`` as a rank-one operator."""
    D = lat.d**lat.N
    vec = np.eye(D, dtype=complex).reshape(-1)
    return LowRankOperator(doubled_labels(lat), vec, [lat.d] * (2 * lat.N))


def embed_on_lattice(lat: Lattice, op: DenseOperator) -> DenseOperator:
    return op.embed(physical_labels(lat), lat.d)


def unitary_channel(lat: Lattice, U, name: str = "unitary", meta=None) -> Channel:
    if isinstance(U, DenseOperator):
        U = embed_on_lattice(lat, U).data
    U = np.asarray(U, dtype=complex)
    if not np.allclose(U.conj().T @ U, np.eye(U.shape[0]), atol=1e-10):
        raise ChannelError("matrix is not unitary")
    return cjs_from_kraus(lat, [U], name=name, meta=meta)


def identity_channel(lat: Lattice) -> Channel:
    return unitary_channel(lat, np.eye(lat.d**lat.N), name="identity")


def permutation_unitary(lat: Lattice, mapping: dict) -> np.ndarray:
    """Unitary moving the content of site ``n`` to site ``mapping[n]``."""
    sites = lat.sites
    idx = lat.index
    target = [idx[lat.site(mapping.get(s, s))] for s in sites]
    if sorted(target) != list(range(lat.N)):
        raise ChannelError("site mapping is not a bijection")
    d, N = lat.d, lat.N
    D = d**N
    U = np.zeros((D, D), dtype=complex)
    for col, digits in enumerate(itertools.product(range(d), repeat=N)):
        out = [0] * N
        for i, v in enumerate(digits):
            out[target[i]] = v
        row = 0
        for v in out:
            row = row * d + v
        U[row, col] = 1.0
    return U


def shift_unitary(lat: Lattice, step: int = 1, axis: int = 0) -> np.ndarray:
    if lat.boundary != PERIODIC:
        raise ChannelError("a lattice shift is only a unitary bijection under periodic boundaries")
    mapping = {}
    for s in lat.sites:
        t = list(s)
        t[axis] = (t[axis] + step) % lat.M
        mapping[s] = tuple(t)
    return permutation_unitary(lat, mapping)


def shift_channel(lat: Lattice, step: int = 1, axis: int = 0) -> Channel:
    return unitary_channel(lat, shift_unitary(lat, step, axis), name="shift",
                           meta={"step": step, "axis": axis})


def swap_unitary(lat: Lattice, n, m) -> np.ndarray:
    n, m = lat.site(n), lat.site(m)
    return permutation_unitary(lat, {n: m, m: n})


def gate_on(lat: Lattice, sites: Sequence, gate: np.ndarray) -> np.ndarray:
    """Full-lattice matrix of ``gate`` acting on ``sites`` (in the given order)."""
    labels = [phys(lat.site(s)) for s in sites]
    k = len(labels)
    op = DenseOperator(labels, np.asarray(gate, dtype=complex), [lat.d] * k)
    return embed_on_lattice(lat, op).data


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(dim, random_state=rng)


def brickwork_unitary(lat: Lattice, layers: int = 1, seed: int = 0) -> np.ndarray:
    """Product of ``layers`` layers of Haar-random nearest-neighbour gates along axis 0.

    Layer ``k`` pairs sites ``(2j + k%2, 2j + k%2 + 1)``; under periodic
    boundaries the pair wrapping around the ring is included when ``M`` is even.
    """
    rng = np.random.default_rng(seed)
    D = lat.d**lat.N
    U = np.eye(D, dtype=complex)
    for layer in range(layers):
        offset = layer % 2
        for s in lat.sites:
            x = s[0]
            if (x - offset) % 2:
                continue
            nxt = x + 1
            if nxt >= lat.M:
                if lat.boundary != PERIODIC or lat.M % 2:
                    continue
                nxt = 0
            t = (nxt,) + s[1:]
            g = random_unitary(lat.d**2, rng)
            U = gate_on(lat, [s, t], g) @ U
    return U


def product_unitary(lat: Lattice, seed: int = 0, gates=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    if gates is None:
        gates = [random_unitary(lat.d, rng) for _ in lat.sites]
    return reduce(np.kron, gates, np.eye(1, dtype=complex))


def completely_depolarizing(lat: Lattice) -> Channel:
    D = lat.d**lat.N
    R = np.eye(D * D, dtype=complex) / D
    return from_cjs(lat, R, name="depolarizing")


def convex_combine(weights: Sequence[float], chs: Sequence[Channel], name: str = "mixture") -> Channel:
    weights = np.asarray(weights, dtype=float)
    if len(weights) != len(chs) or not chs:
        raise ChannelError("need one weight per channel")
    if np.any(weights < 0) or not np.isclose(weights.sum(), 1.0, atol=1e-12):
        raise ChannelError("weights must be non-negative and sum to one")
    lat = chs[0].lattice
    if any(ch.lattice != lat for ch in chs):
        raise ChannelError("channels live on different lattices")
    if all(ch._prefer_factor() for ch in chs):
        kraus = [np.sqrt(w) * k for w, ch in zip(weights, chs) if w > 0 for k in ch.kraus_arrays]
        return cjs_from_kraus(lat, kraus, name=name)
    R = sum(w * ch.cjs.data for w, ch in zip(weights, chs))
    return from_cjs(lat, R, name=name, check_psd=False)


def product_channel(lat: Lattice, locals_: Sequence[tuple[Sequence, Sequence[np.ndarray]]],
                    name: str = "product") -> Channel:
    """Tensor product of channels on disjoint site groups; unlisted sites see the identity.

    ``locals_`` holds ``(sites, kraus_list)`` pairs with Kraus operators acting
    on ``sites`` in the listed order.
    """
    used = set()
    per_group = []
    for sites, kraus in locals_:
        sites = [lat.site(s) for s in sites]
        if used & set(sites):
            raise ChannelError("local channels must act on disjoint sites")
        used |= set(sites)
        per_group.append([gate_on(lat, sites, k) for k in kraus])
    kraus = []
    for combo in itertools.product(*per_group):
        kraus.append(reduce(np.matmul, combo, np.eye(lat.d**lat.N, dtype=complex)))
    return cjs_from_kraus(lat, kraus, name=name)


def compose(second: Channel, first: Channel, name: str = "composition") -> Channel:
    """The channel ``second o first``."""
    if second.lattice != first.lattice:
        raise ChannelError("channels live on different lattices")
    kraus = [b @ a for b in second.kraus_arrays for a in first.kraus_arrays]
    return cjs_from_kraus(first.lattice, kraus, name=name)


# Stinespring dilation with one ancilla per site


class Circuit(list):
    """Ordered gates (DenseOperators on physical and/or ancilla labels), first applied first."""

    def to_dense(self, support: Sequence[SiteLabel], d: int) -> DenseOperator:
        support = canonical(support)
        dims = [d] * len(support)
        check_cap(d ** len(support))
        U = identity(support, dims)
        for g in self:
            U = g.embed(support, d) @ U
        return U


def dilated_channel(lat: Lattice, u, ancilla_init=None, name: str = "dilated",
                    tol: float = 1e-10) -> Channel:
    """``rho -> tr_V'[u (rho (x) |1><1|^N) u^dagger]``.

    ``u`` is a unitary on the doubled lattice, given either as a dense
    operator on ``V`` and ``V'`` or as a :class:`Circuit` of local gates.
    ``ancilla_init`` is the single-site ancilla state (default the basis
    state ``|1>``).
    """
    d, N = lat.d, lat.N
    D = d**N
    if ancilla_init is None:
        ancilla_init = np.eye(d)[1]
    phi = np.asarray(ancilla_init, dtype=complex)
    phi = phi / np.linalg.norm(phi)
    phiN = reduce(np.kron, [phi] * N, np.ones(1, dtype=complex))
    labels = doubled_labels(lat)
    dims = [d] * (2 * N)
    if isinstance(u, DenseOperator):
        if set(u.support) != set(labels):
            raise ChannelError("dilation unitary must act on the physical sites and all ancillas")
        if not u.is_unitary(tol):
            raise ChannelError("dilation operator is not unitary")
        u4 = u.data.reshape(D, D, D, D)
        # K_j[i, i'] = sum_k u[(i, j), (i', k)] phi_k
        K = np.einsum("ijak,k->jia", u4, phiN)
    else:
        gates = list(u)
        for g in gates:
            if not g.is_unitary(tol):
                raise ChannelError("dilation circuit contains a non-unitary gate")
        cols = []
        for i in range(D):
            vec = np.kron(np.eye(D)[i], phiN).astype(complex)
            for g in gates:
                vec = apply_local(vec, labels, dims, g)
            cols.append(vec.reshape(D, D))
        # cols[i'][i, j] -> K_j[i, i']
        K = np.stack(cols, axis=2).transpose(1, 0, 2)
    kraus = [k for k in K if np.linalg.norm(k) > tol]
    return cjs_from_kraus(lat, kraus, name=name)


def site_pair_gate(lat: Lattice, site, gate: np.ndarray) -> DenseOperator:
    """Two-qudit gate on a physical site and its own ancilla (physical factor first)."""
    s = lat.site(site)
    return DenseOperator([phys(s), anc(s)], gate, [lat.d, lat.d])


def physical_gate(lat: Lattice, sites: Sequence, gate: np.ndarray) -> DenseOperator:
    """Gate on physical sites; its factor order follows ``sites``."""
    return DenseOperator([phys(lat.site(s)) for s in sites], gate, [lat.d] * len(sites))


SWAP = np.eye(4)[[0, 2, 1, 3]].astype(complex)
CNOT = np.eye(4)[[0, 1, 3, 2]].astype(complex)


# examples from the taxonomy


def _require_qubits(lat: Lattice, what: str):
    if lat.d != 2:
        raise ChannelError(f"{what} is defined for qubits (d = 2)")


def example1(lat: Lattice) -> Channel:
    """``rho -> (rho + X rho X) / 2`` with ``X`` the global spin flip."""
    _require_qubits(lat, "example1")
    D = 2**lat.N
    flip = reduce(np.kron, [PAULI["X"]] * lat.N, np.eye(1, dtype=complex))
    return cjs_from_kraus(lat, [np.eye(D) / np.sqrt(2), flip / np.sqrt(2)], name="example1")


def half_shift_pairs(lat: Lattice, v1: str = "half") -> list[tuple[tuple, tuple]]:
    """Pairs ``(n, n + e)`` with ``e = (M/2, 0, ...)``.

    ``v1="half"`` takes ``n_1 < M/2`` (``M/2`` disjoint pairs per row).
    ``v1="inclusive"`` also keeps ``n_1 = M/2``, whose partner wraps around to
    ``n_1 = 0`` on periodic lattices; those pairs overlap the others.
    """
    if lat.M % 2:
        raise ChannelError("the half-lattice shift needs an even M")
    h = lat.M // 2
    if v1 not in ("half", "inclusive"):
        raise ChannelError(f"unknown V1 convention {v1!r}")
    top = h + 1 if v1 == "inclusive" else h
    pairs = []
    for s in lat.sites:
        if s[0] < top:
            x = s[0] + h
            if x >= lat.M:
                if lat.boundary != PERIODIC:
                    continue
                x -= lat.M
            pairs.append((s, (x,) + s[1:]))
    return pairs


def example2(lat: Lattice) -> Channel:
    """``R = 1/2^N + S`` with ``S`` a weighted sum of doubled Pauli strings.

    The weights come from the product of Bell pairs ``(|00>+|11>)/sqrt 2``
    between each site and its partner half a lattice away.  ``k_N`` is fixed to
    ``1 / (2^N sum_s |c_s|)``, enough for ``||S||_inf <= 2^-N``.
    """
    _require_qubits(lat, "example2")
    if lat.M % 2:
        raise ChannelError("example2 needs an even M")
    N = lat.N
    pairs = half_shift_pairs(lat)
    XX = np.kron(PAULI["X"], PAULI["X"])
    ZZ = np.kron(PAULI["Z"], PAULI["Z"])
    local = {0: ZZ, 1: XX}
    bell = np.zeros((2, 2))
    bell[0, 0] = bell[1, 1] = 1 / np.sqrt(2)
    abs_sum = 1.0
    factors = []
    for n, m in pairs:
        W = sum(bell[s, t] * np.kron(local[s], local[t]) for s in (0, 1) for t in (0, 1))
        factors.append(DenseOperator([phys(n), anc(n), phys(m), anc(m)], W, [2] * 4))
        abs_sum *= np.abs(bell).sum()
    k_N = 1.0 / (2**N * abs_sum)
    S = tensor_all(factors) * k_N
    R = S.data
    R[np.diag_indices_from(R)] += 1.0 / 2**N
    R_op = DenseOperator(S.support, R, S.dims)
    meta = {"k_N": k_N, "sum_abs_c": abs_sum, "bell_branch": "(|00>+|11>)/sqrt(2)",
            "pairs": [[list(n), list(m)] for n, m in pairs],
            "tn_representable": "bond dimension grows with M (informational)"}
    # positivity is guaranteed by ||S||_inf <= 2^-N; callers can still run validate()
    return from_cjs(lat, R_op, name="example2", meta=meta, check_psd=False)


def example2_S(lat: Lattice) -> DenseOperator:
    """The traceless part ``S = R - 1/2^N`` of :func:`example2`."""
    ch = example2(lat)
    R = ch.cjs
    return DenseOperator(R.support, R.data - np.eye(R.dim) / 2**lat.N, R.dims)


def example3(lat: Lattice, v1: str = "half") -> Channel:
    """Product of two-site correlated dephasings ``E_{n, n+e}`` across half the lattice."""
    _require_qubits(lat, "example3")
    pairs = half_shift_pairs(lat, v1)
    Z = PAULI["Z"]
    ZZ = np.kron(Z, Z)
    if v1 == "half":
        return product_channel(
            lat, [((n, m), [np.eye(4) / np.sqrt(2), ZZ / np.sqrt(2)]) for n, m in pairs],
            name="example3",
        )
    ch = identity_channel(lat)
    for n, m in pairs:
        step = product_channel(lat, [((n, m), [np.eye(4) / np.sqrt(2), ZZ / np.sqrt(2)])])
        ch = compose(step, ch)
    ch.name = "example3"
    return ch


BUILTINS = {
    "identity": identity_channel,
    "example1": example1,
    "example2": example2,
    "example3": example3,
    "shift": shift_channel,
}


def builtin(name: str, lat: Lattice, **params) -> Channel:
    if name == "brickwork":
        return unitary_channel(lat, brickwork_unitary(lat, **params), name="brickwork", meta=params)
    if name == "swap":
        n, m = params.get("sites", (0, lat.M - 1))
        return unitary_channel(lat, swap_unitary(lat, n, m), name="swap", meta={"sites": [n, m]})
    if name == "product":
        return unitary_channel(lat, product_unitary(lat, **params), name="product", meta=params)
    if name == "depolarizing":
        return completely_depolarizing(lat)
    try:
        ctor = BUILTINS[name]
    except KeyError:
        raise ChannelError(f"unknown builtin channel {name!r}") from None
    return ctor(lat, **params)


def channel_from_json(obj: dict, lat: Lattice) -> Channel:
    if "builtin" in obj:
        params = {k: v for k, v in obj.items() if k != "builtin"}
        return builtin(obj["builtin"], lat, **params)
    if "kraus" in obj:
        ops = [DenseOperator.from_json(m) for m in obj["kraus"]]
        return cjs_from_kraus(lat, [embed_on_lattice(lat, k) for k in ops], name="user-kraus")
    if "cjs" in obj:
        return from_cjs(lat, DenseOperator.from_json(obj["cjs"]), name="user-cjs")
    raise ChannelError("channel spec needs one of 'builtin', 'kraus' or 'cjs'")
