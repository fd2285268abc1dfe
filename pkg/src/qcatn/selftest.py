"""Quick invariant checks run by ``qcatn selftest``."""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from . import channels as C
from .classify import is_cpqc, is_fqc, is_lpqc, is_qca, is_unitary
from .entanglement import araki_lieb_bound_check, cjs_mutual_information, doubled, lpqc_cjs_bound
from .lattice import Lattice
from .tensor_core import DenseOperator, partial_trace, phys
from .tn import build_pepu_from_qca, is_simple


class Check(NamedTuple):
    name: str
    passed: bool
    detail: str


def _example1_taxonomy():
    ch = C.example1(Lattice(1, 4))
    cp, lp = is_cpqc(ch), is_lpqc(ch)
    ok = cp.passed and not lp.passed and not is_fqc(ch) and not is_unitary(ch).passed
    return ok, f"cpqc={cp.residual:.1e} lpqc={lp.residual:.3f}"


def _example3_pair_mi():
    lat = Lattice(1, 4)
    mi = cjs_mutual_information(C.example3(lat), doubled([0]), doubled([2]))
    return abs(mi - 1.0) <= 1e-9, f"I={mi:.12f}"


def _theorem1_fixtures():
    lat = Lattice(1, 4)
    fixtures = {
        "bw1": C.brickwork_unitary(lat, 1, seed=0),
        "swap": C.swap_unitary(lat, 0, 3),
        "product": C.product_unitary(lat, seed=0),
    }
    rows = []
    ok = True
    for key, U in fixtures.items():
        ch = C.unitary_channel(lat, U, name=key)
        v = (is_qca(ch), is_lpqc(ch).passed, is_simple(ch).passed)
        ok &= len(set(v)) == 1
        rows.append(f"{key}={v[0]}")
    return ok, " ".join(rows)


def _shift_pepu():
    dims = []
    worst = 0.0
    for M in (4, 5, 6):
        res = build_pepu_from_qca(C.shift_channel(Lattice(1, M, boundary="periodic")), seed=0)
        dims.append(res.bond_dim)
        worst = max(worst, res.residual)
    return len(set(dims)) == 1 and dims[0] <= 4 and worst <= 1e-8, f"D={dims} residual={worst:.1e}"


def _partial_trace_composition():
    rng = np.random.default_rng(0)
    labels = [phys(k) for k in range(3)]
    X = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    op = DenseOperator(labels, X, [2, 2, 2])
    a = partial_trace(partial_trace(op, [labels[0]]), [labels[2]])
    b = partial_trace(op, [labels[0], labels[2]])
    err = float(np.linalg.norm(a.data - b.data))
    return err <= 1e-12, f"err={err:.1e}"


def _araki_lieb():
    rng = np.random.default_rng(1)
    labels = [phys(k) for k in range(4)]
    worst = np.inf
    for _ in range(20):
        g = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        rho = g @ g.conj().T
        op = DenseOperator(labels, rho / np.trace(rho).real, [2] * 4)
        worst = min(worst, araki_lieb_bound_check(op, labels[:1], labels[1:2], labels[2:]).slack)
    return worst >= -1e-9, f"min slack={worst:.3e}"


def _dilated_area_law():
    lat = Lattice(1, 4)
    u = C.Circuit([C.site_pair_gate(lat, 1, C.CNOT), C.physical_gate(lat, [1, 2], C.CNOT)])
    ch = C.dilated_channel(lat, u)
    checks = [lpqc_cjs_bound(ch, A) for A in lat.enumerate_S(2)]
    return all(c.passed for c in checks) and is_lpqc(ch).passed, f"regions={len(checks)}"


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "example1_taxonomy": _example1_taxonomy,
    "example3_pair_mutual_information": _example3_pair_mi,
    "unitary_predicates_agree": _theorem1_fixtures,
    "shift_pepu_bond_dimension": _shift_pepu,
    "partial_trace_composition": _partial_trace_composition,
    "araki_lieb_random_states": _araki_lieb,
    "dilated_channel_cjs_bound": _dilated_area_law,
}


def run_selftest() -> list[Check]:
    out = []
    for name, fn in CHECKS.items():
        try:
            ok, detail = fn()
        except Exception as exc:  # report, do not abort the remaining checks
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(Check(name, bool(ok), detail))
    return out
