"""Check metric-like properties of diffusion distances on concrete instances.

The audit computes the distance matrix ``D = 1 - sim`` of a variant and
reports symmetry defect, the most negative triangle slack
``D[i,j] + D[j,k] - D[i,k]`` with its witness triple, non-negativity,
row-stochasticity of the underlying walk, the row-sum ratio ``min p / max p``
and connectivity of the bipartite graph. Up to ``cap`` objects every triple
is scanned; above it triples are sampled, which can only ever demonstrate a
violation, never certify its absence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .diffusion import (Variant, forward_row, operator_for, pair, reversed_row,
                        similarity_matrix)
from .graph import FeatureMatrix, from_dense, row_normalize, row_sum_ratio
from .parallel import chunks, get_threads, pmap

AUDIT_CAP = 2_000
DEFAULT_SAMPLE = 100_000
TOL = 1e-12
RATIO_THRESHOLD = 2.0 / 3.0


@dataclass(frozen=True)
class MetricAuditReport:
    variant: Variant
    n: int
    symmetry_defect: float
    worst_triangle: float
    witness: tuple
    nonneg_ok: bool
    stochasticity_defect: float
    p_ratio: float
    ratio_condition: bool
    connected: bool
    n_components: int
    zero_distance_ok: bool
    exhaustive: bool
    triples_checked: int
    seed: int | None = None

    def items(self):
        i, j, k = self.witness
        return [
            ("variant", self.variant.kind),
            ("order", self.variant.order),
            ("n", self.n),
            ("symmetry_defect", f"{self.symmetry_defect:.17g}"),
            ("worst_triangle", f"{self.worst_triangle:.17g}"),
            ("witness", f"{i},{j},{k}"),
            ("nonneg_ok", self.nonneg_ok),
            ("stochasticity_defect", f"{self.stochasticity_defect:.17g}"),
            ("p_ratio", f"{self.p_ratio:.17g}"),
            ("ratio_condition", self.ratio_condition),
            ("connected", self.connected),
            ("components", self.n_components),
            ("zero_distance_ok", self.zero_distance_ok),
            ("mode", "exhaustive" if self.exhaustive else "sampled"),
            ("triples_checked", self.triples_checked),
            ("seed", self.seed),
        ]

    def format(self) -> str:
        rows = self.items()
        width = max(len(k) for k, _ in rows)
        aligned = [f"{k:<{width}}  {v}" for k, v in rows]
        machine = [f"{k}={v}" for k, v in rows]
        return "\n".join(aligned + [""] + machine) + "\n"


# --------------------------------------------------------------------------
# connectivity


def check_connectivity(w: FeatureMatrix):
    """Union-find over the bipartite edges.

    Returns ``(connected, components)`` where ``components`` lists the object
    indices of each component, ordered by smallest member.
    """
    parent = np.arange(w.n + w.m)

    def find(a):
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    for i, s, _ in w.entries():
        ra, rb = find(i), find(w.n + s)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups = {}
    for i in range(w.n):
        groups.setdefault(find(i), []).append(i)
    comps = sorted(groups.values(), key=lambda g: g[0])
    return len(comps) == 1, comps


# --------------------------------------------------------------------------
# fixtures


def counterexample_matrix() -> FeatureMatrix:
    """Three objects, two features: the one-round triangle inequality fails."""
    return from_dense([[1, 0], [2, 6], [0, 12]])


@dataclass(frozen=True, eq=False)
class TightnessFixture:
    matrix: FeatureMatrix
    bound: float
    similarities: dict
    slack: float


def tightness_fixture(extra_rows=((0, 0, 1, 0), (0, 0, 0.5, 0.5))) -> TightnessFixture:
    """Row-stochastic instance where the 2/3 bound on the triangle sum is attained.

    Objects 0..2 are ``(1, 0)``, ``(1/2, 1/2)``, ``(0, 1)`` on the first two
    features; every extra row has zero weight there and sums to one.
    """
    extra = [list(r) for r in extra_rows]
    width = max([2] + [len(r) for r in extra])
    head = [[1.0, 0.0], [0.5, 0.5], [0.0, 1.0]]
    rows = [r + [0.0] * (width - len(r)) for r in head + extra]
    W = np.array(rows, dtype=np.float64)
    if np.any(W[3:, :2] != 0) or not np.allclose(W.sum(axis=1), 1.0):
        raise ValueError("extra rows must be zero on the first two features and sum to 1")
    w = from_dense(W)
    a, b, c = W[0], W[1], W[2]
    denom = a + b + c
    used = denom > 0
    bound = float(np.sum((a[used] + c[used]) * b[used] / denom[used]))
    v = Variant("normalized", 1)
    sims = {(0, 1): pair(w, v, 0, 1), (1, 2): pair(w, v, 1, 2), (0, 2): pair(w, v, 0, 2)}
    slack = (1 - sims[(0, 1)]) + (1 - sims[(1, 2)]) - (1 - sims[(0, 2)])
    return TightnessFixture(w, bound, sims, slack)


# --------------------------------------------------------------------------
# audit


def _scan_exhaustive(D, threads):
    threads = get_threads() if threads is None else threads
    parts = pmap(lambda b: _kernels.triangle_scan(D, *b), chunks(D.shape[0], 4 * threads), threads)
    best = min(parts, key=lambda t: t[0])  # min keeps the first (lowest i) on ties
    return best[0], best[1:]


def _zero_distance_ok(D, comps, n):
    singletons = {g[0] for g in comps if len(g) == 1}
    ii, jj = np.nonzero(D <= TOL)
    return all(i == j and i in singletons for i, j in zip(ii.tolist(), jj.tolist()))


def audit(w: FeatureMatrix, variant: Variant, *, cap=AUDIT_CAP, sample=None, seed=0,
          threads=None) -> MetricAuditReport:
    """Audit ``variant`` on ``w``; exhaustive up to ``cap`` objects."""
    connected, comps = check_connectivity(w)
    p_ratio = row_sum_ratio(row_normalize(w) if variant.kind == "normalized" else w)
    if w.n <= cap and sample is None:
        M = similarity_matrix(w, variant)
        D = 1.0 - M
        F = M.T if variant.kind == "reversed" else M
        worst, witness = _scan_exhaustive(D, threads)
        return MetricAuditReport(
            variant=variant, n=w.n,
            symmetry_defect=float(np.max(np.abs(D - D.T))),
            worst_triangle=worst, witness=tuple(witness),
            nonneg_ok=bool(D.min() >= -TOL),
            stochasticity_defect=float(np.max(np.abs(F.sum(axis=1) - 1.0))),
            p_ratio=p_ratio, ratio_condition=p_ratio > RATIO_THRESHOLD,
            connected=connected, n_components=len(comps),
            zero_distance_ok=_zero_distance_ok(D, comps, w.n),
            exhaustive=True, triples_checked=w.n ** 3, seed=None,
        )
    return _audit_sampled(w, variant, sample or DEFAULT_SAMPLE, seed, connected, comps, p_ratio)


def _audit_sampled(w, variant, sample, seed, connected, comps, p_ratio):
    op = operator_for(w, variant.kind)
    rng = np.random.Generator(np.random.PCG64(seed))
    triples = rng.integers(0, w.n, size=(sample, 3))
    sims = {}

    def sim_row(i):
        if i not in sims:
            if variant.kind == "reversed":
                sims[i] = reversed_row(op, i, variant.order).scores
            else:
                sims[i] = forward_row(op, i, variant.order).scores
        return sims[i]

    slack = np.empty(sample)
    sym = 0.0
    for t, (i, j, k) in enumerate(triples.tolist()):
        ri, rj = sim_row(i), sim_row(j)
        dij, djk, dik = 1 - ri[j], 1 - rj[k], 1 - ri[k]
        slack[t] = (dij + djk) - dik
        sym = max(sym, abs(ri[j] - rj[i]))
    t = int(np.argmin(slack))
    order = np.lexsort(triples.T[::-1])
    ties = [r for r in order.tolist() if slack[r] == slack[t]]
    witness = tuple(int(x) for x in triples[ties[0]])

    # row sums of the walk itself, on (at most 256 of) the sampled queries
    stoch = 0.0
    for i in sorted(sims)[:256]:
        row = forward_row(op, i, variant.order).scores
        stoch = max(stoch, abs(row.sum() - 1.0))
    nonneg = all(r.max() <= 1.0 + TOL for r in sims.values())
    singletons = {g[0] for g in comps if len(g) == 1}
    zero_ok = True
    for i, r in sims.items():
        for j in np.flatnonzero(1 - r <= TOL).tolist():
            if not (i == j and i in singletons):
                zero_ok = False
    return MetricAuditReport(
        variant=variant, n=w.n, symmetry_defect=sym,
        worst_triangle=float(slack[t]), witness=witness, nonneg_ok=bool(nonneg),
        stochasticity_defect=stoch, p_ratio=p_ratio, ratio_condition=p_ratio > RATIO_THRESHOLD,
        connected=connected, n_components=len(comps), zero_distance_ok=zero_ok,
        exhaustive=False, triples_checked=sample, seed=seed,
    )
