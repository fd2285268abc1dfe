"""Entropies, mutual information and empirical area-law audits (all in bits)."""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from . import __version__
from .channels import Channel, doubled_labels
from .classify import is_unitary
from .lattice import Lattice
from .tensor_core import (
    EPS_NUM,
    DenseOperator,
    anc,
    as_labels,
    canonical,
    check_cap,
    phys,
)

NEGATIVE_FLOOR = 1e-12
DISCLAIMER = (
    "Empirical consistency check at the tested sizes and sampled product states; "
    "not a proof of an area law."
)
VERDICTS = ("consistent_with_area_law", "violating", "inconclusive")


class InvalidStateError(ValueError):
    pass


class NonProductInputError(ValueError):
    pass


def _matrix(rho) -> np.ndarray:
    return rho.data if isinstance(rho, DenseOperator) else np.asarray(rho, dtype=complex)


def spectrum_entropy(values: np.ndarray) -> float:
    """``-sum p log2 p`` with tiny negative eigenvalues clamped to zero."""
    w = np.asarray(values, dtype=float)
    if np.any(w < -NEGATIVE_FLOOR):
        raise InvalidStateError(f"state has a negative eigenvalue {w.min():.3e}")
    w = w[w > 0]
    return float(max(0.0, -np.sum(w * np.log2(w))))


def von_neumann_entropy(rho, tol: float = EPS_NUM) -> float:
    """Von Neumann entropy in bits of a density matrix (0 log 0 = 0)."""
    x = _matrix(rho)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise InvalidStateError("density matrix must be square")
    if np.linalg.norm(x - x.conj().T) > tol * max(1.0, np.linalg.norm(x)):
        raise InvalidStateError("density matrix is not Hermitian")
    tr = np.trace(x).real
    if abs(tr - 1.0) > tol:
        raise InvalidStateError(f"density matrix has trace {tr:.12f}, expected 1")
    return spectrum_entropy(np.linalg.eigvalsh((x + x.conj().T) / 2))


def _labels(rho: DenseOperator, sites) -> tuple:
    labels = canonical(as_labels(sites))
    missing = set(labels) - set(rho.support)
    if missing:
        raise ValueError(f"labels {sorted(missing)} are not in the state's support")
    return labels


def _complement(rho: DenseOperator, labels) -> tuple:
    return tuple(s for s in rho.support if s not in set(labels))


def subsystem_entropy(rho: DenseOperator, sites) -> float:
    labels = _labels(rho, sites)
    if not labels:
        return 0.0
    return von_neumann_entropy(rho.reduce_to(labels))


def entanglement_entropy(psi: DenseOperator, A) -> float:
    """``S(tr_{A^c} psi)`` for a pure state given as a rank-one density matrix."""
    x = psi.data
    purity = float(np.real(np.vdot(x, x)))
    if abs(purity - 1.0) > 1e-8 or abs(np.trace(x).real - 1.0) > 1e-8:
        raise InvalidStateError("entanglement entropy needs a pure normalized state")
    labels = _labels(psi, A)
    rest = _complement(psi, labels)
    # the smaller side is cheaper and gives the same value
    side = labels if np.prod([psi.dims[psi.support.index(s)] for s in labels]) <= \
        np.prod([psi.dims[psi.support.index(s)] for s in rest] or [1]) else rest
    return subsystem_entropy(psi, side)


def vector_entropy(vec: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> float:
    """Entanglement entropy of a normalized pure state vector across ``keep | rest``."""
    n = len(dims)
    rest = [i for i in range(n) if i not in keep]
    dk = int(np.prod([dims[i] for i in keep]))
    t = np.asarray(vec).reshape(dims).transpose(list(keep) + rest).reshape(dk, -1)
    s = np.linalg.svd(t, compute_uv=False)
    return spectrum_entropy(s**2 / np.sum(s**2))


def mutual_information(rho: DenseOperator, A, B=None) -> float:
    """``I(A:B) = S_A + S_B - S_AB``; ``B`` defaults to the complement of ``A``."""
    A = _labels(rho, A)
    B = _complement(rho, A) if B is None else _labels(rho, B)
    if set(A) & set(B):
        raise ValueError("regions A and B overlap")
    AB = canonical(A + B)
    S_AB = von_neumann_entropy(rho.data) if set(AB) == set(rho.support) else subsystem_entropy(rho, AB)
    value = subsystem_entropy(rho, A) + subsystem_entropy(rho, B) - S_AB
    return max(0.0, value) if value > -1e-10 else value


class ArakiLiebCheck(NamedTuple):
    passed: bool
    slack: float


def araki_lieb_bound_check(rho: DenseOperator, A, a, B, tol: float = EPS_NUM) -> ArakiLiebCheck:
    """``I(Aa:B) <= I(A:B) + 2 S(a)``; the slack is the right side minus the left."""
    A, a, B = (_labels(rho, X) for X in (A, a, B))
    if set(A) & set(a) or set(A) & set(B) or set(a) & set(B):
        raise ValueError("regions A, a and B must be disjoint")
    sub = rho.reduce_to(canonical(A + a + B))
    lhs = mutual_information(sub, canonical(A + a), B)
    rhs = mutual_information(sub, A, B) + 2 * subsystem_entropy(sub, a)
    slack = rhs - lhs
    return ArakiLiebCheck(bool(slack >= -tol), float(slack))


# CJS-level quantities


def cjs_entropy(ch: Channel, labels) -> float:
    """Entropy of the normalized CJS ``R / d^N`` restricted to ``labels``."""
    lat = ch.lattice
    norm = float(ch.d**lat.N)
    labels = canonical(as_labels(labels))
    if set(labels) == set(doubled_labels(lat)):
        return spectrum_entropy(np.asarray(ch.cjs_spectrum()).real / norm)
    if not labels:
        return 0.0
    return von_neumann_entropy(ch.reduced_cjs(labels).data / norm)


def cjs_mutual_information(ch: Channel, X, Y) -> float:
    """Mutual information of the normalized CJS between two sets of labels."""
    X = canonical(as_labels(X))
    Y = canonical(as_labels(Y))
    if set(X) & set(Y):
        raise ValueError("label sets overlap")
    return cjs_entropy(ch, X) + cjs_entropy(ch, Y) - cjs_entropy(ch, canonical(X + Y))


def doubled(sites) -> tuple:
    """Physical and ancilla labels of the given sites."""
    return canonical([phys(s) for s in sites] + [anc(s) for s in sites])


class CJSBoundCheck(NamedTuple):
    passed: bool
    value: float
    bound: float


def lpqc_cjs_bound(ch: Channel, A, tol: float = EPS_NUM) -> CJSBoundCheck:
    """``I(Abar Abar' : Bbar Bbar') <= 2 (|a| + |b|) log2 d`` on the normalized CJS."""
    part = ch.lattice.partition(A)
    value = cjs_mutual_information(ch, doubled(part.A_bar), doubled(part.B_bar))
    bound = 2 * (len(part.a) + len(part.b)) * np.log2(ch.d)
    return CJSBoundCheck(bool(value <= bound + tol), float(value), float(bound))


# product-state samplers


def _basis(d: int, k: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[k] = 1.0
    return v


def adversarial_product_states(lat: Lattice) -> dict:
    """Deterministic product states: all zero, all plus, Neel and a domain wall."""
    d, N = lat.d, lat.N
    plus = np.ones(d, dtype=complex) / np.sqrt(d)
    states = {
        "all_zero": [_basis(d, 0)] * N,
        "all_plus": [plus] * N,
        "neel": [_basis(d, sum(s) % 2) for s in lat.sites],
        "domain_wall": [_basis(d, int(s[0] >= lat.M // 2)) for s in lat.sites],
    }
    return states


def random_pure_product(lat: Lattice, rng: np.random.Generator) -> list[np.ndarray]:
    out = []
    for _ in lat.sites:
        v = rng.standard_normal(lat.d) + 1j * rng.standard_normal(lat.d)
        out.append(v / np.linalg.norm(v))
    return out


def random_mixed_product(lat: Lattice, rng: np.random.Generator) -> list[np.ndarray]:
    out = []
    for _ in lat.sites:
        g = rng.standard_normal((lat.d, lat.d)) + 1j * rng.standard_normal((lat.d, lat.d))
        rho = g @ g.conj().T
        out.append(rho / np.trace(rho).real)
    return out


def _check_product(factors, lat: Lattice, pure: bool):
    if not isinstance(factors, (list, tuple)) or len(factors) != lat.N:
        raise NonProductInputError(
            f"input states must be given as {lat.N} single-site factors"
        )
    for f in factors:
        f = np.asarray(f)
        ok_vec = f.shape == (lat.d,)
        ok_mat = f.shape == (lat.d, lat.d)
        if not (ok_vec or (ok_mat and not pure)):
            raise NonProductInputError(f"single-site factor of shape {f.shape} is not a local state")


def _product_vector(factors) -> np.ndarray:
    vec = np.ones(1, dtype=complex)
    for f in factors:
        vec = np.kron(vec, np.asarray(f, dtype=complex))
    return vec


def _product_density(factors) -> np.ndarray:
    rho = np.ones((1, 1), dtype=complex)
    for f in factors:
        f = np.asarray(f, dtype=complex)
        if f.ndim == 1:
            f = np.outer(f, f.conj())
        rho = np.kron(rho, f)
    return rho


# area-law audit


@dataclass
class AreaLawReport:
    channel_family: str
    metric: str
    sizes: list
    per_region: list = field(default_factory=list)
    c_by_size: dict = field(default_factory=dict)
    fitted_c: float = 0.0
    c_bound: float | None = None
    verdict: str = "inconclusive"
    seed: int = 0
    samples: int = 0
    tolerance: float = EPS_NUM
    region_policy: str = "blocks"
    disclaimer: str = DISCLAIMER
    version: str = __version__

    def to_json(self) -> dict:
        out = asdict(self)
        out["c_by_size"] = {str(k): v for k, v in self.c_by_size.items()}
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["M", "size_A", "boundary_A", "value"])
        for row in self.per_region:
            w.writerow([row["M"], row["size"], row["boundary"], repr(row["value"])])
        return buf.getvalue()


def left_half(lat: Lattice) -> list[tuple]:
    return [tuple(s for s in lat.sites if s[0] < lat.M // 2)]


REGION_CHOICES = {
    "blocks": lambda lat: lat.blocks(),
    "half": left_half,
}


def _regions(lat: Lattice, regions) -> list[tuple]:
    if callable(regions):
        return [lat.region(A) for A in regions(lat)]
    if isinstance(regions, str):
        if regions not in REGION_CHOICES:
            raise ValueError(f"unknown region choice {regions!r}")
        return REGION_CHOICES[regions](lat)
    return [lat.region(A) for A in regions]


def _verdict(c_by_size: dict, c_bound, tol: float) -> str:
    if c_bound is not None:
        return VERDICTS[0] if max(c_by_size.values()) <= c_bound + tol else VERDICTS[1]
    sizes = sorted(c_by_size)
    c = [c_by_size[M] for M in sizes]
    if all(x <= c[0] + tol for x in c[1:]):
        return VERDICTS[0]
    if len(c) > 1 and all(y > x + tol for x, y in zip(c, c[1:])):
        return VERDICTS[1]
    return VERDICTS[2]


def audit_area_law(family: Callable[[Lattice], Channel], sizes: Sequence[int], lattice: Lattice,
                   metric: str = "ee", samples: int = 16, seed: int = 0, regions="blocks",
                   c_bound: float | None = None, input_states=None, name: str | None = None,
                   tol: float = EPS_NUM) -> AreaLawReport:
    """Apply ``family(lattice of size M)`` to product states and record
    ``value / |boundary A|`` over the swept regions.

    ``metric`` is ``"ee"`` (entanglement entropy, pure inputs, unitary family)
    or ``"mi"`` (mutual information with the complement, mixed product inputs).
    ``input_states`` may be a callable ``(lattice, rng) -> list of factor lists``
    replacing the default sampler.  With ``c_bound`` the verdict compares the
    fitted constant with that bound; otherwise it looks at how the per-size
    constant moves with ``M``.
    """
    if metric not in ("ee", "mi"):
        raise ValueError(f"unknown metric {metric!r}")
    rng = np.random.default_rng(seed)
    rows = []
    c_by_size = {}
    family_name = name or getattr(family, "__name__", "family")
    for M in sizes:
        lat = lattice.with_size(M)
        check_cap(lat.d**lat.N)
        ch = family(lat)
        pure = metric == "ee"
        if input_states is not None:
            states = list(input_states(lat, rng))
        else:
            sampler = random_pure_product if pure else random_mixed_product
            states = list(adversarial_product_states(lat).values())
            states += [sampler(lat, rng) for _ in range(samples)]
        for s in states:
            _check_product(s, lat, pure)
        regs = _regions(lat, regions)
        best = {A: 0.0 for A in regs}
        if pure:
            check = is_unitary(ch)
            if not check.passed:
                raise InvalidStateError("the entanglement metric needs a unitary family")
            dims = [lat.d] * lat.N
            for factors in states:
                out = check.U @ _product_vector(factors)
                for A in regs:
                    keep = [lat.index[x] for x in A]
                    best[A] = max(best[A], vector_entropy(out, dims, keep))
        else:
            V = ch.V
            for factors in states:
                rho = ch.apply(DenseOperator(V, _product_density(factors), [lat.d] * lat.N))
                for A in regs:
                    best[A] = max(best[A], mutual_information(rho, [phys(x) for x in A]))
        c = 0.0
        for A in regs:
            boundary = lat.boundary_size(A)
            if boundary == 0:
                continue
            ratio = best[A] / boundary
            c = max(c, ratio)
            rows.append({
                "M": M,
                "A": [list(x) for x in A],
                "size": len(A),
                "boundary": boundary,
                "value": float(best[A]),
                "ratio": float(ratio),
            })
        c_by_size[M] = float(c)
    return AreaLawReport(
        channel_family=family_name,
        metric=metric,
        sizes=list(sizes),
        per_region=rows,
        c_by_size=c_by_size,
        fitted_c=float(max(c_by_size.values())),
        c_bound=c_bound,
        verdict=_verdict(c_by_size, c_bound, 1e-9),
        seed=seed,
        samples=samples,
        tolerance=tol,
        region_policy=regions if isinstance(regions, str) else "custom",
    )
