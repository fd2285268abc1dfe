"""Membership predicates for causality- and locality-preserving channels.

Each predicate sweeps a set of regions ``A`` (all with a non-empty ``B``) and
reports the worst relative residual.  Verdicts compare that residual with a
tolerance.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.sparse.linalg import eigsh

from . import __version__
from .channels import Channel
from .lattice import Lattice, Site
from .tensor_core import (
    DenseOperator,
    anc,
    identity,
    phys,
    relative_residual,
    tensor_product,
    weyl_basis_on,
)

DEFAULT_TOL = 1e-8
REGION_POLICIES = ("singletons", "blocks", "default", "all")


class EmptyRegionSetError(ValueError):
    """The lattice has no region with a non-empty ``B`` for the declared range."""


class TaxonomyInconsistency(RuntimeError):
    def __init__(self, message: str, report: "ClassificationReport"):
        super().__init__(message)
        self.report = report


class Verdict(NamedTuple):
    passed: bool
    residual: float


def select_regions(lat: Lattice, policy: str | Sequence = "default", max_size: int = 2):
    """Regions in ``S`` to sweep.

    ``"default"`` takes every region with at most ``max_size`` sites plus all
    contiguous blocks; ``"all"`` enumerates the whole of ``S``.  An explicit
    list of regions is filtered to ``S``.
    """
    if not isinstance(policy, str):
        chosen = [lat.region(A) for A in policy]
    elif policy == "singletons":
        chosen = lat.enumerate_S(1)
    elif policy == "blocks":
        chosen = lat.blocks()
    elif policy == "default":
        chosen = lat.enumerate_S(max_size) + lat.blocks()
    elif policy == "all":
        chosen = lat.enumerate_S(lat.N)
    else:
        raise ValueError(f"unknown region policy {policy!r}; choose from {REGION_POLICIES}")
    out = sorted({A for A in chosen if lat.in_S(A)}, key=lambda A: (len(A), A))
    if not out:
        raise EmptyRegionSetError(
            f"no region A has a non-empty B on {lat.to_dict()}; use a larger lattice"
        )
    return out


def _labels(sites: Iterable[Site], kind=phys):
    return [kind(s) for s in sites]


def cpqc_residual(ch: Channel, A) -> float:
    """Residual of ``tr_{a, Bbar}(R) = sigma_{A, Abar'} (x) 1_{Bbar'}``."""
    lat = ch.lattice
    part = lat.partition(A)
    keep = _labels(part.A) + list(ch.V_anc)
    T = ch.reduced_cjs(keep)
    left = _labels(part.A) + _labels(part.A_bar, anc)
    right = _labels(part.B_bar, anc)
    # sigma = tr_{Bbar'}(T) / d^|Bbar'|, compared against sigma (x) 1
    sigma = T.reduce_to(left) / ch.d ** len(right)
    approx = tensor_product(sigma, identity(right, ch.d))
    return relative_residual(T.data, approx.data)


def lpqc_residual(ch: Channel, A) -> float:
    """Residual of ``tr_{a, b}(R) = sigma_{A, Abar'} (x) sigma_{B, Bbar'}``."""
    lat = ch.lattice
    part = lat.partition(A)
    keep = _labels(part.A + part.B) + list(ch.V_anc)
    T = ch.reduced_cjs(keep)
    d = ch.d
    left = _labels(part.A) + _labels(part.A_bar, anc)
    right = _labels(part.B) + _labels(part.B_bar, anc)
    sigma_A = T.reduce_to(left) / d ** len(part.B_bar)
    sigma_B = T.reduce_to(right) / d ** len(part.A_bar)
    approx = tensor_product(sigma_A, sigma_B)
    return relative_residual(T.data, approx.data)


def _full_stack(ch: Channel, ops) -> np.ndarray:
    return np.stack([op.embed(ch.V, ch.d).data for op in ops])


def _chunks(it, size):
    it = iter(it)
    while True:
        chunk = list(itertools.islice(it, size))
        if not chunk:
            return
        yield chunk


def heisenberg_residual(ch: Channel, A, chunk: int = 64) -> float:
    """Worst spread of ``E^dagger(X_A)`` outside ``Abar`` over a full operator basis on ``A``."""
    lat = ch.lattice
    part = lat.partition(A)
    d = ch.d
    outside = _labels(part.B_bar)
    inside = _labels(part.A_bar)
    scale = np.sqrt(float(ch.dim))  # Frobenius norm of any embedded Weyl operator
    worst = 0.0
    for ops in _chunks(weyl_basis_on(_labels(part.A), d), chunk):
        images = ch.adjoint_apply_many(_full_stack(ch, ops))
        for Y in images:
            Yop = DenseOperator(ch.V, Y, [d] * lat.N)
            local = Yop.reduce_to(inside) / d ** len(outside)
            approx = tensor_product(local, identity(outside, d))
            worst = max(worst, relative_residual(Yop.data, approx.data, scale=scale))
    return worst


def factorization_residual(ch: Channel, A, chunk: int = 64) -> float:
    """Worst ``||E^dagger(X_A Y_B) - E^dagger(X_A) E^dagger(Y_B)||_F`` over basis pairs,
    relative to ``||X_A Y_B||_F``."""
    lat = ch.lattice
    part = lat.partition(A)
    d = ch.d
    scale = np.sqrt(float(ch.dim))
    basis_A = list(weyl_basis_on(_labels(part.A), d))
    full_A = _full_stack(ch, basis_A)
    img_A = ch.adjoint_apply_many(full_A)
    worst = 0.0
    for ops in _chunks(weyl_basis_on(_labels(part.B), d), chunk):
        full_B = _full_stack(ch, ops)
        img_B = ch.adjoint_apply_many(full_B)
        for XA, EX in zip(full_A, img_A):
            # X_A and Y_B act on disjoint sites, so the full-lattice product is the tensor product
            lhs = ch.adjoint_apply_many(np.matmul(XA[None], full_B))
            diff = lhs - np.matmul(EX[None], img_B)
            err = np.sqrt(np.sum(np.abs(diff) ** 2, axis=(1, 2))).max()
            worst = max(worst, float(err) / scale)
    return worst


def _sweep(ch: Channel, fn, regions) -> tuple[float, list[tuple]]:
    per = [(A, fn(ch, A)) for A in select_regions(ch.lattice, regions)]
    return max(r for _, r in per), per


def is_cpqc(ch: Channel, tol: float = DEFAULT_TOL, regions="default") -> Verdict:
    """Partial-trace (Choi) test for causality preservation."""
    worst, _ = _sweep(ch, cpqc_residual, regions)
    return Verdict(bool(worst <= tol), float(worst))


def is_cpqc_heisenberg(ch: Channel, tol: float = DEFAULT_TOL, regions="default") -> bool:
    """Independent test straight from the Heisenberg-picture definition."""
    worst, _ = _sweep(ch, heisenberg_residual, regions)
    return bool(worst <= tol)


def is_lpqc(ch: Channel, tol: float = DEFAULT_TOL, regions="default") -> Verdict:
    worst, _ = _sweep(ch, lpqc_residual, regions)
    return Verdict(bool(worst <= tol), float(worst))


def fqc_residual(ch: Channel, A) -> float:
    return max(heisenberg_residual(ch, A), factorization_residual(ch, A))


def is_fqc(ch: Channel, tol: float = DEFAULT_TOL, regions="default") -> bool:
    """Causality preservation plus multiplicativity of the adjoint on separated regions."""
    worst, _ = _sweep(ch, fqc_residual, regions)
    return bool(worst <= tol)


class UnitaryCheck(NamedTuple):
    passed: bool
    ratio: float
    U: np.ndarray | None


def _fix_phase(U: np.ndarray) -> np.ndarray:
    tr = np.trace(U)
    if abs(tr) > 1e-8 * U.shape[0]:
        return U * (abs(tr) / tr)
    k = np.argmax(np.abs(U))
    z = U.flat[k]
    return U * (abs(z) / z)


def is_unitary(ch: Channel, tol: float = DEFAULT_TOL) -> UnitaryCheck:
    """Rank-one test on the CJS; returns the unitary (phase fixed so ``tr U > 0``
    where possible) when it passes."""
    if ch._prefer_factor():
        F = ch.factor.factor
        gram = F.conj().T @ F
        w, v = np.linalg.eigh(gram)
        w, v = w[::-1], v[:, ::-1]
        total = float(np.sum(w))
        lam2 = float(w[1]) if len(w) > 1 else 0.0
        top = F @ v[:, 0] if w[0] > 0 else None
        top = None if top is None else top / np.linalg.norm(top) * np.sqrt(w[0])
    else:
        R = ch.cjs.data
        total = float(np.trace(R).real)
        if R.shape[0] <= 1024:
            w, v = np.linalg.eigh(R)
            w, v = w[::-1], v[:, ::-1]
        else:
            w, v = eigsh(R, k=2, which="LA")
            order = np.argsort(w)[::-1]
            w, v = w[order], v[:, order]
        lam2 = float(w[1])
        top = v[:, 0] * np.sqrt(max(w[0], 0.0))
    ratio = max(lam2, 0.0) / total
    if ratio > tol or top is None:
        return UnitaryCheck(False, ratio, None)
    U = top.reshape(ch.dim, ch.dim)
    return UnitaryCheck(True, ratio, _fix_phase(U))


def is_qca(ch: Channel, tol: float = DEFAULT_TOL, regions="default") -> bool:
    """Unitary with adjoint support growth bounded by ``r`` (checked on operator bases)."""
    return is_unitary(ch, tol).passed and is_cpqc_heisenberg(ch, tol, regions)


# reports


@dataclass
class ClassificationReport:
    channel_id: str
    lattice: dict
    tolerance: float
    region_policy: str
    per_region: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    max_residuals: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    version: str = __version__

    def to_json(self) -> dict:
        return asdict(self)


def _check_consistency(report: ClassificationReport):
    v = report.verdicts
    problems = []
    if v["is_lpqc"] and not v["is_cpqc"]:
        problems.append("LPQC verdict without CPQC")
    if v["is_fqc"] != v["is_lpqc"]:
        problems.append("fQC and LPQC verdicts differ")
    if v["is_qca"] != (v["is_unitary"] and v["is_cpqc_heisenberg"]):
        problems.append("QCA verdict is not unitary AND CPQC")
    if v["is_unitary"] and v["is_cpqc"] != v["is_lpqc"]:
        problems.append("unitary channel with differing CPQC and LPQC verdicts")
    if v["is_cpqc"] != v["is_cpqc_heisenberg"]:
        problems.append("Choi and Heisenberg CPQC tests disagree")
    if problems:
        raise TaxonomyInconsistency("; ".join(problems), report)


def taxonomy(ch: Channel, tol: float = DEFAULT_TOL, regions="default") -> ClassificationReport:
    """Evaluate every predicate region by region and check the class inclusions.

    Raises :class:`TaxonomyInconsistency` when the verdicts violate
    ``LPQC = fQC ⊂ CPQC`` (which signals a tolerance or numerical problem).
    """
    lat = ch.lattice
    regions_list = select_regions(lat, regions)
    per = []
    for A in regions_list:
        heis = heisenberg_residual(ch, A)
        per.append({
            "A": [list(s) for s in A],
            "cpqc_residual": cpqc_residual(ch, A),
            "cpqc_heisenberg_residual": heis,
            "lpqc_residual": lpqc_residual(ch, A),
            "fqc_residual": max(heis, factorization_residual(ch, A)),
        })
    keys = ["cpqc_residual", "cpqc_heisenberg_residual", "lpqc_residual", "fqc_residual"]
    worst = {k: float(max(row[k] for row in per)) for k in keys}
    unitary = is_unitary(ch, tol)
    verdicts = {
        "is_cpqc": bool(worst["cpqc_residual"] <= tol),
        "is_cpqc_heisenberg": bool(worst["cpqc_heisenberg_residual"] <= tol),
        "is_lpqc": bool(worst["lpqc_residual"] <= tol),
        "is_fqc": bool(worst["fqc_residual"] <= tol),
        "is_unitary": unitary.passed,
    }
    verdicts["is_qca"] = verdicts["is_unitary"] and verdicts["is_cpqc_heisenberg"]
    worst["unitary_rank_ratio"] = unitary.ratio
    report = ClassificationReport(
        channel_id=ch.name,
        lattice=lat.to_dict(),
        tolerance=tol,
        region_policy=regions if isinstance(regions, str) else "explicit",
        per_region=per,
        verdicts=verdicts,
        max_residuals=worst,
        notes=[
            "sigma operators are the partial-trace projections; other choices could give "
            "smaller residuals for channels outside a class",
            "tnQC membership is not decided from a single finite lattice",
        ],
    )
    _check_consistency(report)
    return report
