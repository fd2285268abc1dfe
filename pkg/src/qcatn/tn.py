"""Tensor-network operators on the lattice graph and the PEPU construction for QCA.

A :class:`TensorNetworkOperator` stores one tensor per site with axes
``(out, in, *bonds)``, one bond axis per incident lattice edge.  Edges that
carry no correlations simply have bond dimension 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channels import Channel, doubled_labels, physical_labels
from .classify import DEFAULT_TOL, Verdict, select_regions
from .classify import is_unitary as _is_unitary
from .lattice import PERIODIC, Lattice, Site
from .tensor_core import (
    DenseOperator,
    anc,
    apply_local,
    check_cap,
    identity,
    phys,
    relative_residual,
)

EPS_SVD = 1e-10
MAX_ATTEMPTS = 8
MIN_PROJECTED_NORM = 1e-6

Edge = tuple[Site, Site]


class QCAError(ValueError):
    """The input is not a unitary with range-r locality."""


class TensorNetworkError(ValueError):
    pass


@dataclass
class TensorNetworkOperator:
    lattice: Lattice
    tensors: dict
    legs: dict
    bond_dims: dict = field(init=False)

    def __post_init__(self):
        dims = {}
        for site, T in self.tensors.items():
            edges = self.legs[site]
            if T.ndim != 2 + len(edges):
                raise TensorNetworkError(f"tensor at {site} has {T.ndim} axes, expected {2 + len(edges)}")
            for edge, size in zip(edges, T.shape[2:]):
                if dims.setdefault(edge, size) != size:
                    raise TensorNetworkError(f"bond mismatch on edge {edge}: {dims[edge]} vs {size}")
        self.bond_dims = dims

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims.values(), default=1)

    def to_json(self) -> dict:
        return {
            "lattice": self.lattice.to_dict(),
            "bond_dims": [[list(map(list, e)), int(D)] for e, D in sorted(self.bond_dims.items())],
            "tensors": [
                {
                    "site": list(site),
                    "legs": ["out", "in"] + [[list(e[0]), list(e[1])] for e in self.legs[site]],
                    "shape": list(T.shape),
                    "re": T.real.reshape(-1).tolist(),
                    "im": T.imag.reshape(-1).tolist(),
                }
                for site, T in sorted(self.tensors.items())
            ],
        }


def incident_edges(lat: Lattice) -> dict:
    legs = {s: [] for s in lat.sites}
    for e in lat.edges:
        legs[e[0]].append(e)
        legs[e[1]].append(e)
    return {s: tuple(v) for s, v in legs.items()}


def _edge(a: Site, b: Site) -> Edge:
    return tuple(sorted((a, b)))


def contract_to_dense(tno: TensorNetworkOperator, order: Sequence | None = None) -> DenseOperator:
    """Contract every bond and return the operator on the physical sites.

    ``order`` is the sequence in which site tensors are absorbed (default:
    row-major); the result does not depend on it beyond rounding.
    """
    lat = tno.lattice
    check_cap(lat.d**lat.N)
    order = list(lat.sites) if order is None else [lat.site(s) for s in order]
    if sorted(order) != sorted(lat.sites):
        raise TensorNetworkError("contraction order must visit every site once")
    current, labels = None, []
    for site in order:
        T = tno.tensors[site]
        tl = [("out", site), ("in", site)] + [("bond", e) for e in tno.legs[site]]
        if current is None:
            current, labels = T, tl
            continue
        shared = [x for x in tl if x in labels]
        current = np.tensordot(
            current, T, axes=([labels.index(x) for x in shared], [tl.index(x) for x in shared])
        )
        labels = [x for x in labels if x not in shared] + [x for x in tl if x not in shared]
    # bonds to self-loops cannot occur on simple graphs; any leftover bond is a bug
    leftover = [x for x in labels if x[0] == "bond"]
    if leftover:
        raise TensorNetworkError(f"unmatched bonds {leftover}")
    target = [("out", s) for s in lat.sites] + [("in", s) for s in lat.sites]
    current = current.transpose([labels.index(x) for x in target])
    D = lat.d**lat.N
    return DenseOperator(physical_labels(lat), current.reshape(D, D), [lat.d] * lat.N)


def from_path_mpo(lat: Lattice, path: Sequence[Site], mpo: Sequence[np.ndarray]) -> TensorNetworkOperator:
    """Place MPO tensors ``(Dl, out, in, Dr)`` along a path of lattice-adjacent sites."""
    legs = incident_edges(lat)
    bonds = {}
    for k in range(len(path) - 1):
        e = _edge(path[k], path[k + 1])
        if e not in set(lat.edges):
            raise TensorNetworkError(f"path step {path[k]} -> {path[k + 1]} is not a lattice edge")
        bonds[e] = k
    tensors = {}
    for k, (site, W) in enumerate(zip(path, mpo)):
        Dl, d_out, d_in, Dr = W.shape
        shape = [d_out, d_in]
        src = []
        for e in legs[site]:
            if e in bonds and bonds[e] == k - 1:
                shape.append(Dl)
                src.append("l")
            elif e in bonds and bonds[e] == k:
                shape.append(Dr)
                src.append("r")
            else:
                shape.append(1)
                src.append(None)
        # move (Dl, out, in, Dr) into (out, in, legs...) with singleton axes for idle edges
        T = W.transpose(1, 2, 0, 3)
        if "l" not in src:
            T = T[:, :, 0, :]
        if "r" not in src:
            T = T[..., 0]
        present = [x for x in src if x is not None]
        natural = [x for x in ("l", "r") if x in present]
        T = T.transpose([0, 1] + [2 + natural.index(x) for x in present])
        tensors[site] = T.reshape(shape)
    return TensorNetworkOperator(lat, tensors, legs)


def snake_path(lat: Lattice) -> list[Site]:
    if lat.d_L == 1:
        return list(lat.sites)
    if lat.d_L == 2:
        out = []
        for x in range(lat.M):
            ys = range(lat.M) if x % 2 == 0 else range(lat.M - 1, -1, -1)
            out.extend((x, y) for y in ys)
        return out
    raise TensorNetworkError("only 1D and 2D lattices are supported")


def product_mpo(lat: Lattice, local_ops: Sequence[np.ndarray]) -> TensorNetworkOperator:
    """Bond-dimension-1 operator ``(x)_n u_n``."""
    path = list(lat.sites)
    mpo = [np.asarray(u, dtype=complex).reshape(1, lat.d, lat.d, 1) for u in local_ops]
    return from_path_mpo(lat, path, mpo)


def shift_mpo(lat: Lattice) -> TensorNetworkOperator:
    """Hand-built periodic MPO of the one-step shift with bond dimension ``d``.

    The bond from ``n`` to ``n+1`` carries the input index of site ``n``,
    which becomes the output index of site ``n+1``.
    """
    if lat.d_L != 1 or lat.boundary != PERIODIC:
        raise TensorNetworkError("the shift MPO is built for periodic chains")
    d = lat.d
    legs = incident_edges(lat)
    delta = np.eye(d)
    tensors = {}
    for site in lat.sites:
        (x,) = site
        left = _edge(site, ((x - 1) % lat.M,))
        right = _edge(site, ((x + 1) % lat.M,))
        # W[o, i, l, r] = delta(o, l) delta(i, r)
        W = np.einsum("ol,ir->oilr", delta, delta).astype(complex)
        pos = {left: 2, right: 3}
        T = W.transpose([0, 1] + [pos[e] for e in legs[site]])
        tensors[site] = T
    return TensorNetworkOperator(lat, tensors, legs)


def random_mpo(lat: Lattice, D: int, rng: np.random.Generator) -> TensorNetworkOperator:
    """Random bond-dimension-``D`` operator on a chain (open boundary bonds on the path)."""
    path = snake_path(lat)
    mpo = []
    for k in range(len(path)):
        Dl = 1 if k == 0 else D
        Dr = 1 if k == len(path) - 1 else D
        shape = (Dl, lat.d, lat.d, Dr)
        mpo.append(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return from_path_mpo(lat, path, mpo)


# parent Hamiltonian of the CJS vector


@dataclass
class ParentHamiltonianData:
    """Local commuting projectors whose common zero-energy state is ``(U (x) 1)|Phi>``."""

    qca: Channel
    projectors: dict
    projector_residual: float
    commutator_residual: float
    support_residual: float
    ground_state_residual: float
    spectrum_check: bool


def _restrict(Y: DenseOperator, inside, d) -> tuple[DenseOperator, float]:
    outside = [s for s in Y.support if s not in set(inside)]
    local = Y.reduce_to(inside) / d ** len(outside)
    approx = local.embed(Y.support, d)
    return local, relative_residual(Y.data, approx.data, scale=max(Y.norm(), 1e-300))


def local_projectors(U: np.ndarray, lat: Lattice, r: int | None = None,
                     tol: float = DEFAULT_TOL) -> dict:
    """``T_n = (U (x) 1) P_n (U (x) 1)^dagger`` as operators on ``ball(n) + n'``.

    ``P_n`` is the projector onto the normalized maximally entangled state of
    site ``n`` and its ancilla, so ``Q~_n = 1 - T_n``.  Raises :class:`QCAError`
    if some ``U E U^dagger`` leaks out of the radius-``r`` ball.
    """
    r = lat.r if r is None else r
    d = lat.d
    V = physical_labels(lat)
    dims = [d] * lat.N
    Ud = DenseOperator(V, U, dims)
    out = {}
    for n in lat.sites:
        ball = [phys(s) for s in lat.ball(n, r)]
        T = None
        for i in range(d):
            for j in range(d):
                E = np.zeros((d, d), dtype=complex)
                E[i, j] = 1.0
                Y = Ud @ DenseOperator([phys(n)], E, [d]).embed(V, d) @ Ud.dag()
                local, leak = _restrict(Y, ball, d)
                if leak > tol:
                    raise QCAError(
                        f"U E U^dagger for site {n} is not supported within radius {r} (leak {leak:.2e})"
                    )
                term = local.embed(local.support + (anc(n),), d)
                term = DenseOperator(term.support, term.data, term.dims)
                # tensor the ancilla matrix unit E_ij onto n'
                anc_op = DenseOperator([anc(n)], E, [d]).embed(term.support, d)
                piece = term @ anc_op / d
                T = piece if T is None else T + piece
        out[n] = T
    return out


def parent_hamiltonian(qca: Channel, r: int | None = None, tol: float = DEFAULT_TOL) -> ParentHamiltonianData:
    lat = qca.lattice
    U = _unitary_of(qca, tol)
    Ts = local_projectors(U, lat, r, tol)
    d = lat.d
    Qs = {n: identity(T.support, d) - T for n, T in Ts.items()}
    proj = max(relative_residual((Q @ Q).data, Q.data, scale=max(Q.norm(), 1.0)) for Q in Qs.values())
    comm = 0.0
    sites = list(Qs)
    for i, n in enumerate(sites):
        for m in sites[i + 1:]:
            if not set(Qs[n].support) & set(Qs[m].support):
                continue
            union = sorted(set(Qs[n].support) | set(Qs[m].support))
            A, B = Qs[n].embed(union, d), Qs[m].embed(union, d)
            comm = max(comm, relative_residual((A @ B).data, (B @ A).data,
                                               scale=max(A.norm() * B.norm(), 1.0)))
    r_used = lat.r if r is None else r
    support = 0.0
    for n, Q in Qs.items():
        allowed = {phys(s) for s in lat.ball(n, r_used)} | {anc(n)}
        support = max(support, float(len(set(Q.support) - allowed)))
    labels = doubled_labels(lat)
    psi = U.reshape(-1)
    ground = 0.0
    for Q in Qs.values():
        ground = max(ground, float(np.linalg.norm(apply_local(psi, labels, [d] * len(labels), Q))))
    ground /= np.linalg.norm(psi)
    ok = proj <= tol and comm <= tol and support == 0.0 and ground <= tol
    return ParentHamiltonianData(qca, Qs, proj, comm, support, ground, ok)


def _unitary_of(qca: Channel, tol: float) -> np.ndarray:
    check = _is_unitary(qca, tol)
    if not check.passed:
        raise QCAError(f"channel {qca.name!r} is not unitary (rank ratio {check.ratio:.2e})")
    return check.U


# PEPU extraction


@dataclass
class PEPUResult:
    tno: TensorNetworkOperator
    bond_dim: int
    path_bonds: list
    residual: float
    seed: int
    attempts: int
    projected_norm: float
    bound: int | None
    parent: ParentHamiltonianData

    def report(self) -> dict:
        return {
            "bond_dim": self.bond_dim,
            "path_bonds": self.path_bonds,
            "reconstruction_residual": self.residual,
            "seed": self.seed,
            "attempts": self.attempts,
            "projected_norm": self.projected_norm,
            "bond_dimension_bound": self.bound,
            "parent_hamiltonian": {
                "projector_residual": self.parent.projector_residual,
                "commutator_residual": self.parent.commutator_residual,
                "support_violations": self.parent.support_residual,
                "ground_state_residual": self.parent.ground_state_residual,
                "spectrum_check": self.parent.spectrum_check,
            },
        }


def mps_from_vector(psi: np.ndarray, local_dims: Sequence[int], eps: float = EPS_SVD) -> list[np.ndarray]:
    """Left-to-right SVD sweep; singular values ``<= eps`` are dropped.

    ``psi`` is normalized before the sweep; tensors have shape ``(Dl, d_k, Dr)``.
    """
    psi = np.asarray(psi, dtype=complex)
    norm = np.linalg.norm(psi)
    rest = psi / norm
    tensors = []
    Dl = 1
    for k, dk in enumerate(local_dims[:-1]):
        mat = rest.reshape(Dl * dk, -1)
        u, s, vh = np.linalg.svd(mat, full_matrices=False)
        keep = max(1, int(np.sum(s > eps)))
        tensors.append(u[:, :keep].reshape(Dl, dk, keep))
        rest = s[:keep, None] * vh[:keep]
        Dl = keep
    tensors.append(rest.reshape(Dl, local_dims[-1], 1))
    return tensors


def build_pepu_from_qca(qca: Channel, r: int | None = None, seed: int = 0,
                        eps_svd: float = EPS_SVD, tol: float = DEFAULT_TOL,
                        max_attempts: int = MAX_ATTEMPTS) -> PEPUResult:
    """Tensor-network form of a QCA via its parent Hamiltonian.

    The product of the local projectors ``T_n = 1 - Q~_n`` is applied to a
    random product state of site/ancilla pairs; the result is proportional to
    the CJS vector ``(U (x) 1)|Phi>``, which is split by sequential SVDs along
    a path through the lattice.  Each site's ``d**2`` leg is read as
    ``(out, in) = (physical, ancilla)``.
    """
    lat = qca.lattice
    d = lat.d
    U = _unitary_of(qca, tol)
    parent = parent_hamiltonian(qca, r, tol)
    Ts = {n: identity(Q.support, d) - Q for n, Q in parent.projectors.items()}
    labels = doubled_labels(lat)
    dims = [d] * len(labels)
    rng = np.random.default_rng(seed)
    psi = None
    attempts = 0
    projected = 0.0
    while attempts < max_attempts:
        attempts += 1
        pairs = []
        for _ in lat.sites:
            a = rng.standard_normal(d * d) + 1j * rng.standard_normal(d * d)
            pairs.append((a / np.linalg.norm(a)).reshape(d, d))
        vec = _pair_product_state(pairs, lat.N, d)
        for n in lat.sites:
            vec = apply_local(vec, labels, dims, Ts[n])
        projected = float(np.linalg.norm(vec))
        if projected >= MIN_PROJECTED_NORM:
            psi = vec
            break
    if psi is None:
        raise QCAError(
            f"all {max_attempts} random product states were annihilated; block sites or "
            "start from a low-bond-dimension PEPS"
        )
    path = snake_path(lat)
    index = lat.index
    N = lat.N
    # reorder legs to (s_p0, s_p0', s_p1, s_p1', ...) along the path
    axes = []
    for s in path:
        axes += [index[s], N + index[s]]
    grouped = psi.reshape(dims).transpose(axes).reshape(-1)
    mps = mps_from_vector(grouped, [d * d] * N, eps_svd)
    # fix the norm and global phase so the network reproduces U itself
    target = U.reshape(dims).transpose(axes).reshape(-1)
    overlap = np.vdot(grouped, target)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    mps[-1] = mps[-1] * phase * np.sqrt(float(d**N))
    mpo = [T.reshape(T.shape[0], d, d, T.shape[2]) for T in mps]
    tno = from_path_mpo(lat, path, mpo)
    dense = contract_to_dense(tno)
    residual = relative_residual(U, dense.data)
    path_bonds = [int(T.shape[2]) for T in mps[:-1]]
    bound = bond_dimension_bound(d, lat.d_L) if lat.d_L in (1, 2) else None
    return PEPUResult(tno, tno.max_bond, path_bonds, residual, seed, attempts, projected, bound, parent)


def _pair_product_state(pairs, N, d) -> np.ndarray:
    """``(x)_m |alpha_m>`` with each ``alpha_m`` on (site m, ancilla m), in canonical order."""
    vec = np.ones(1, dtype=complex)
    for a in pairs:
        vec = np.kron(vec, a.reshape(-1))
    # current order: (s0, s0', s1, s1', ...); canonical wants all physical then all ancilla
    t = vec.reshape([d] * (2 * N))
    order = [2 * k for k in range(N)] + [2 * k + 1 for k in range(N)]
    return t.transpose(order).reshape(-1)


def bond_dimension_bound(d: int, d_L: int) -> int:
    """A-priori bond dimension of the projector construction: ``d**8`` on chains,
    ``d**16`` on square lattices."""
    if d < 2:
        raise ValueError("d must be at least 2")
    if d_L == 1:
        return d**8
    if d_L == 2:
        return d**16
    raise ValueError(f"no bound implemented for d_L={d_L}")


# simpleness, checked through the factorization it implies


def _grouped(U: np.ndarray, d: int, N: int, out_groups, in_groups) -> np.ndarray:
    """``U`` with output legs regrouped as ``out_groups`` and input legs as ``in_groups``."""
    t = U.reshape([d] * (2 * N))
    order = [i for g in out_groups for i in g] + [N + i for g in in_groups for i in g]
    shape = [d ** len(g) for g in out_groups] + [d ** len(g) for g in in_groups]
    return t.transpose(order).reshape(shape)


def simple_residual(qca: Channel, A, U: np.ndarray | None = None, tol: float = DEFAULT_TOL) -> float:
    """Relative violation of
    ``tr_{a,b}(U rho sigma U^dag) = d^-N tr_{a,Bbar}(U rho U^dag) tr_{Abar,b}(U sigma U^dag)``.

    Both sides are bilinear in ``(rho, sigma)``, so they are compared as whole
    maps on the matrix-unit bases of ``Abar`` and ``Bbar``; the Frobenius norm
    of the difference is the same in any orthonormal operator basis.
    """
    lat = qca.lattice
    d, N = lat.d, lat.N
    if U is None:
        U = _unitary_of(qca, tol)
    part = lat.partition(A)
    idx = lat.index
    iA = [idx[s] for s in part.A]
    iB = [idx[s] for s in part.B]
    ia = [idx[s] for s in part.a]
    ib = [idx[s] for s in part.b]
    iAbar = [idx[s] for s in part.A_bar]
    iBbar = [idx[s] for s in part.B_bar]
    check_cap(d ** (len(iA) + len(iB)) * d**N)
    # left side: out (A, B, a+b), in (Abar, Bbar)
    T = _grouped(U, d, N, [iA, iB, ia + ib], [iAbar, iBbar])
    lhs = np.einsum("pqcxz,rscyw->prqsxzyw", T, T.conj())
    # right side factors: rho (x) 1 traced to A, and 1 (x) sigma traced to B
    TA = _grouped(U, d, N, [iA, ia + iBbar], [iAbar, iBbar])
    left = np.einsum("pcxz,rcyz->prxy", TA, TA.conj())
    TB = _grouped(U, d, N, [iB, iAbar + ib], [iAbar, iBbar])
    right = np.einsum("qczx,sczy->qsxy", TB, TB.conj())
    rhs = np.einsum("prxy,qszw->prqsxzyw", left, right) / d**N
    return relative_residual(lhs, rhs)


def is_simple(qca: Channel, tol: float = DEFAULT_TOL, regions="default") -> Verdict:
    U = _unitary_of(qca, tol)
    worst = max(simple_residual(qca, A, U, tol) for A in select_regions(qca.lattice, regions))
    return Verdict(bool(worst <= tol), float(worst))
