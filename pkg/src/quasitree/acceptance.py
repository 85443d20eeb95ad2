"""The shipped acceptance checks.

Each ``criterion_N`` returns a :class:`CriterionResult`.  They are used by the
test-suite and by ``quasitree acceptance`` so the CLI doubles as a regression
harness.  Time limits are part of each check.
"""

from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from typing import Callable

from .acyl import acylindricity_profile, candidate_pairs
from .cayley import build_ball
from .coarse import (
    FiniteGraph,
    augment_and_check,
    bottleneck_constant,
    coarse_connectivity,
    neighborhood_check,
    quasi_convexity,
    random_sparse_graph,
    random_tree,
)
from .fixtures import get_fixture
from .groups import Group
from .projcomplex import (
    alphabet_over,
    build_ball_over,
    build_complex,
    complete_generating_set,
    construct_generating_set,
    default_alpha,
    default_J,
    enumerate_cosets,
    verify_alpha_bound,
    verify_embedding_bounds,
    z_cap_k,
)
from .projection import a4_count, build_projection_table, check_axioms, default_xi, verify_projection_bounds
from .relmetric import PolygonSample, estimate_C, modified_metric, properness_profile, rel_distance, rel_from_identity

FREE = "free-product-c5-z"
DIRECT = "direct-product-c5-z"


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0
    limit: float | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        budget = f" (limit {self.limit:.0f}s)" if self.limit else ""
        return f"criterion {self.number:2d} {status}: {self.title} [{self.seconds:.1f}s{budget}]"


def _timed(number: int, title: str, limit: float | None, fn: Callable[[], tuple[bool, dict]]) -> CriterionResult:
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # noqa: BLE001 - a crash is a failed criterion
        ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
    dt = time.perf_counter() - t0
    if limit is not None and dt > limit:
        ok = False
        detail["timeout"] = f"{dt:.1f}s > {limit}s"
    return CriterionResult(number, title, ok, detail, dt, limit)


def _setup(fixture: str, radius: int, seed: int = 0):
    group = Group(get_fixture(fixture))
    ball = build_ball(group, radius)
    C = estimate_C(ball, PolygonSample(seed=seed)).value
    weights = {lam: modified_metric(group, lam, None, rel_from_identity(ball, lam))
               for lam in range(1, group.n_subgroups + 1)}
    return group, ball, C, weights


# -- 1 ---------------------------------------------------------------------------

def criterion_1() -> CriterionResult:
    def run():
        group = Group(get_fixture(DIRECT))
        ball = build_ball(group, 6)
        H = group.subgroup_elements(1)
        bad = []
        for h, k in itertools.product(H, H):
            d = rel_distance(ball, 1, h, k)
            if not d.is_exact or d.value > 3:
                bad.append((group.format(h), group.format(k), str(d)))
        return not bad, {"pairs": len(H) ** 2, "violations": bad}

    return _timed(1, "relative distances on C5 x Z are exact and at most 3", 10, run)


# -- 2 ---------------------------------------------------------------------------

def criterion_2() -> CriterionResult:
    def run():
        group = Group(get_fixture(FREE))
        a = group.normal_form("a")
        values = {}
        for R in (4, 6, 8):
            d = rel_distance(build_ball(group, R), 1, group.identity, a)
            values[R] = str(d)
            if d.kind != "lower":
                return False, {"values": values}
        nums = [int(values[R][len("LowerBound("):-1]) for R in (4, 6, 8)]
        return nums[0] < nums[1] < nums[2], {"values": values}

    return _timed(2, "relative distance 1 to a on C5 * Z is a strictly growing lower bound", 30, run)


# -- 3 ---------------------------------------------------------------------------

def _metric_checks(fixture: str) -> tuple[bool, dict]:
    group, ball, C, weights = _setup(fixture, 6)
    wt = weights[1]
    H = group.subgroup_elements(1)
    d = {(g, h): wt.d(g, h) for g in H for h in H}
    problems = []
    for g, h in d:
        if d[g, h] != d[h, g]:
            problems.append(("symmetry", group.format(g), group.format(h)))
        if (d[g, h] == 0) != (g == h):
            problems.append(("identity", group.format(g), group.format(h)))
    for g, h, k in itertools.product(H, H, H):
        if d[g, k] > d[g, h] + d[h, k]:
            problems.append(("triangle", group.format(g), group.format(h), group.format(k)))
    exact_pairs = 0
    for g, h in d:
        r = rel_distance(ball, 1, g, h)
        if r.is_exact:
            exact_pairs += 1
            if d[g, h] > r.value:
                problems.append(("dominance", group.format(g), group.format(h)))
    radii = list(range(0, 8))
    counts = [row.count for row in properness_profile(wt.norm, radii, H, group, 1)]
    if any(b < a for a, b in zip(counts, counts[1:])):
        problems.append(("monotone", counts))
    return not problems, {"pairs": len(d), "exact_pairs": exact_pairs, "ball_counts": counts, "problems": problems[:10]}


def criterion_3() -> CriterionResult:
    def run():
        ok1, d1 = _metric_checks(DIRECT)
        ok2, d2 = _metric_checks(FREE)
        return ok1 and ok2, {DIRECT: d1, FREE: d2}

    return _timed(3, "modified metric is a proper metric below the relative metric", None, run)


# -- 4 and 5 -----------------------------------------------------------------------

def criterion_4() -> CriterionResult:
    def run():
        group, ball, C, weights = _setup(FREE, 6)
        universe = enumerate_cosets(ball)
        rep = verify_projection_bounds(ball, universe, C)
        ok = rep.ok and rep.C_final <= 8 and rep.censored == 0
        return ok, rep.to_dict() | {"universe": len(universe)}

    return _timed(4, "projection diameters within 3C and 4C on C5 * Z (C fixed point <= 8)", 120, run)


def criterion_5() -> CriterionResult:
    def run():
        group, ball, C, weights = _setup(FREE, 6)
        universe = enumerate_cosets(ball)
        C = verify_projection_bounds(ball, universe, C).C_final
        xi = default_xi(C)
        table = build_projection_table(ball, universe, weights, C, xi)
        rep = check_axioms(table, xi)
        grid = [xi / 4, xi / 2, xi, 2 * xi, 4 * xi]
        counts = [a4_count(table, x)[0] for x in grid]
        monotone = all(b <= a for a, b in zip(counts, counts[1:]))
        return rep.ok and monotone, rep.to_dict() | {"A4_counts": dict(zip(map(str, grid), counts))}

    return _timed(5, "projection axioms A1-A4 on the trusted C5 * Z universe", None, run)


# -- 6 and 7 -----------------------------------------------------------------------

def _complex_and_x(fixture: str, radius: int = 6):
    group, ball, C, weights = _setup(fixture, radius)
    universe = enumerate_cosets(ball)
    C = verify_projection_bounds(ball, universe, C).C_final
    xi = default_xi(C)
    table = build_projection_table(ball, universe, weights, C, xi)
    J = default_J(C, xi)
    cx = build_complex(table, J, xi)
    X = construct_generating_set(cx, ball)
    Xc, comp = complete_generating_set(X, z_cap_k(group, ball, None), group, weights, J, C, xi)
    return group, ball, C, xi, J, weights, cx, X, Xc, comp


def criterion_6() -> CriterionResult:
    def run():
        detail, ok = {}, True
        for fixture in (FREE, "free-product-c5-z-extra"):
            group, ball, C, xi, J, weights, cx, X, Xc, comp = _complex_and_x(fixture)
            t = group.normal_form("t")
            row = {
                "connected": cx.connected,
                "symmetric": Xc.is_symmetric(group),
                "avoids_H": X.avoids_subgroups(group),
                "t_in_X": t in X,
                "added": len(comp.added_h) + len(comp.added_other),
                "rho": comp.rho,
                "X": [group.format(x) for x in X.elements],
            }
            row["ok"] = row["connected"] and row["symmetric"] and row["avoids_H"] and row["t_in_X"] and row["added"] <= row["rho"]
            ok &= row["ok"]
            detail[fixture] = row
        return ok, detail

    return _timed(6, "complex connected, X symmetric and H-free with t in X, completion within rho", None, run)


def criterion_7() -> CriterionResult:
    def run():
        group, ball, C, xi, J, weights, cx, X, Xc, comp = _complex_and_x(FREE)
        ball_x = build_ball_over(group, Xc, 4)
        core = ball.core(ball.radius // 3)
        emb = verify_embedding_bounds(cx, ball_x, core)
        alpha = default_alpha(J, xi, C)
        al = verify_alpha_bound(ball_x, weights, alpha)
        ok = emb.ok and al.ok and emb.checked > 0 and al.checked > 0
        return ok, {"embedding": emb.to_dict(), "alpha": al.to_dict()}

    return _timed(7, "quasi-isometry bounds and the alpha bound on C5 * Z", None, run)


# -- 8 ---------------------------------------------------------------------------

def brute_force_bottleneck(graph: FiniteGraph, x: int, y: int, z: int) -> int:
    """``1 + max over simple x-y paths of min distance from z``: the least μ such
    that every path meets ``B(z, μ-1)``.  Enumerates all simple paths."""
    dz = graph.dist_from(z)
    best = -1
    stack = [(x, 1 << x, int(dz[x]))]
    while stack:
        v, seen, low = stack.pop()
        if v == y:
            best = max(best, low)
            continue
        for w in graph.adjacency[v]:
            if not seen >> w & 1:
                stack.append((w, seen | 1 << w, min(low, int(dz[w]))))
    return best + 1


def _cut_vs_brute(n_graphs: int = 200, seed: int = 0) -> tuple[int, list]:
    rng = random.Random(seed)
    mismatches, checked = [], 0
    for k in range(n_graphs):
        n = rng.randint(5, 60)
        g = random_sparse_graph(n, rng.randint(0, 3), rng)
        for _ in range(3):
            x, y = rng.randrange(n), rng.randrange(n)
            if x == y:
                continue
            cert = bottleneck_constant(g, pairs=[(x, y)])
            geo, per = cert.sample[0][2], cert.sample[0][3]
            for z, m in zip(geo, per):
                checked += 1
                b = brute_force_bottleneck(g, x, y, z)
                if b != m:
                    mismatches.append((k, x, y, z, m, b))
    return checked, mismatches


def _tree_convexity(n_trees: int = 100, seed: int = 0) -> tuple[int, list]:
    rng = random.Random(seed)
    bad = []
    for k in range(n_trees):
        n = rng.randint(2, 80)
        tree = random_tree(n, rng)
        S = rng.sample(range(n), rng.randint(1, n))
        r = quasi_convexity(tree, S)
        if r.sigma > r.epsilon:
            bad.append((k, r.epsilon, r.sigma))
    return n_trees, bad


def free_product_mu(radii=(4, 6, 8), n_pairs: int = 60, seed: int = 0) -> dict[int, int]:
    """Bottleneck constant of ``Γ(G, X ⊔ H)`` restricted to the ``Z ⊔ H`` balls."""
    group, ball, C, xi, J, weights, cx, X, Xc, comp = _complex_and_x(FREE)
    letters = alphabet_over(group, Xc)
    out = {}
    for R in radii:
        b = build_ball(group, R)
        g = FiniteGraph.on_elements(group, b.elements, letters)
        out[R] = bottleneck_constant(g, n_pairs=n_pairs, seed=seed).mu
    return out


def criterion_8() -> CriterionResult:
    def run():
        mus = free_product_mu()
        checked, mism = _cut_vs_brute()
        trees, bad = _tree_convexity()
        ok = len(set(mus.values())) == 1 and not mism and not bad
        return ok, {"mu_by_radius": mus, "cut_checks": checked, "mismatches": mism[:10], "trees": trees, "tree_failures": bad}

    return _timed(8, "quasi-tree certification: constant bottleneck, cut test = brute force, tree convexity", 300, run)


# -- 9 ---------------------------------------------------------------------------

def random_detour(graph: FiniteGraph, p: list[int], rng: random.Random, stops: int = 2) -> list[int]:
    """A path with the endpoints of ``p`` through a few random vertices near ``p``."""
    waypoints = [p[0]]
    for _ in range(stops):
        v = rng.choice(p)
        for _ in range(rng.randint(0, 3)):
            v = rng.choice(graph.adjacency[v]) if graph.adjacency[v] else v
        waypoints.append(v)
    waypoints.append(p[-1])
    q = [p[0]]
    for a, b in zip(waypoints, waypoints[1:]):
        q.extend(graph.geodesic(a, b)[1:])
    return q


def neighborhood_trials(n: int = 500, seed: int = 0) -> tuple[int, int, int]:
    """(trials, hypothesis holds, conclusion failures) with ``k`` measured from ``q``."""
    rng = random.Random(seed)
    held = failures = 0
    for _ in range(n):
        g = random_sparse_graph(rng.randint(4, 40), rng.randint(0, 8), rng)
        x, y = rng.randrange(g.n), rng.randrange(g.n)
        p = g.geodesic(x, y)
        q = random_detour(g, p, rng)
        k = int(g.dist_to_set(p)[q].max())
        res = neighborhood_check(g, p, q, k)
        held += res.hypothesis
        failures += res.conclusion is False
    return n, held, failures


def chord_augmentation(n: int = 40, seed: int = 0) -> dict:
    rng = random.Random(seed)
    tree = random_tree(n, rng)
    D = tree.distance_matrix()
    chords = [(i, j) for i in range(n) for j in range(i + 1, n) if D[i, j] == 2]
    rep = augment_and_check(tree, chords, 2)
    return rep.to_dict() | {"difference": rep.mu_delta - rep.mu_sigma}


def criterion_9() -> CriterionResult:
    def run():
        aug = [chord_augmentation(seed=s) for s in range(3)]
        trials, held, failures = neighborhood_trials()
        ok = all(a["hypothesis_ok"] for a in aug) and held == trials and failures == 0
        diff = max(a["difference"] for a in aug)
        return ok and math.isfinite(diff), {
            "augmentations": aug,
            "observed_mu_difference": diff,
            "neighborhood_trials": trials,
            "hypothesis_held": held,
            "conclusion_failures": failures,
        }

    return _timed(9, "chord augmentation keeps the bottleneck; neighbourhood check on 500 instances", None, run)


# -- 10 ----------------------------------------------------------------------------

def acyl_counts(fixture: str, radius: int, caps=(4, 6, 8), epsilon: int = 2, R: int = 6, seed: int = 0) -> dict[int, int]:
    group = Group(get_fixture(fixture))
    ball = build_ball(group, radius)
    pairs = candidate_pairs(ball, 40, seed=seed)
    return {cap: acylindricity_profile(ball, epsilon, R, cap, pairs=pairs).max_count for cap in caps}


def criterion_10() -> CriterionResult:
    def run():
        free = acyl_counts(FREE, 8)
        zz = acyl_counts("direct-product-z-z", 12)
        caps = sorted(free)
        stable = free[caps[-1]] == free[caps[-2]]
        growing = all(zz[a] < zz[b] for a, b in zip(caps, caps[1:]))
        return stable and growing, {FREE: free, "direct-product-z-z": zz}

    return _timed(10, "acylindricity contrast: C5 * Z stabilizes, <a> x <x> grows", 300, run)


CRITERIA = [
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
    criterion_6, criterion_7, criterion_8, criterion_9, criterion_10,
]


def run_all(numbers: list[int] | None = None) -> list[CriterionResult]:
    chosen = CRITERIA if not numbers else [CRITERIA[n - 1] for n in numbers]
    return [c() for c in chosen]
