"""Configuration-driven experiment runner.

``run_experiment`` executes the requested stages in dependency order and
collects a JSON-serializable report.  A failing stage is recorded and only the
stages that depend on it are skipped.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Any

from . import __version__
from .acyl import acylindricity_profile, candidate_pairs
from .cayley import BallSizeError, build_ball
from .coarse import FiniteGraph, bottleneck_constant, delta_hyperbolicity, quasi_convexity
from .fixtures import FIXTURES, UnknownFixture, get_fixture
from .groups import Group, GroupError, GroupSpec
from .projcomplex import (
    alphabet_over,
    build_ball_over,
    build_complex,
    check_generation,
    complete_generating_set,
    construct_generating_set,
    default_alpha,
    default_J,
    enumerate_cosets,
    subgroup_closure,
    verify_alpha_bound,
    verify_embedding_bounds,
    z_cap_k,
)
from .projection import a4_count, build_projection_table, check_axioms, default_xi, verify_projection_bounds
from .relmetric import PolygonSample, estimate_C, modified_metric, properness_profile, rel_distance, rel_from_identity

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
STAGES = ("ball", "relmetric", "projection", "complex", "genset", "coarse", "acyl")
DEPENDS = {
    "ball": (),
    "relmetric": ("ball",),
    "projection": ("relmetric",),
    "complex": ("projection",),
    "genset": ("complex",),
    "coarse": ("genset",),
    "acyl": ("ball",),
}


class ConfigError(ValueError):
    pass


class UnknownFixtureError(ConfigError):
    pass


class CapExceededError(ConfigError):
    pass


class InvalidParameterError(ConfigError):
    pass


@dataclass
class ExperimentConfig:
    fixture: str | dict = "free-product-c5-z"
    K: list[str] | None = None
    radius: int = 6
    radii: list[int] = field(default_factory=list)
    hcap: int = 8
    vertex_cap: int = 400_000
    g_caps: list[int] = field(default_factory=lambda: [4, 6])
    C: float | str = "auto"
    xi: float | str = "auto"
    J: float | str = "auto"
    stages: list[str] = field(default_factory=lambda: list(STAGES))
    seed: int = 0
    polygons: int = 200
    genset_radius: int | None = None
    bottleneck_pairs: int = 60
    acyl_epsilon: int = 2
    acyl_R: int = 6
    acyl_pairs: int = 40
    acyl_radius: int | None = None
    output: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data or {})
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise InvalidParameterError(f"unknown config keys: {', '.join(sorted(extra))}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if isinstance(self.fixture, str) and self.fixture not in FIXTURES:
            raise UnknownFixtureError(str(UnknownFixture(self.fixture)))
        for name in ("radius", "hcap", "vertex_cap", "polygons", "bottleneck_pairs", "acyl_pairs"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise InvalidParameterError(f"{name} must be a nonnegative integer, got {v!r}")
        if self.hcap < 1:
            raise InvalidParameterError("hcap must be at least 1")
        if any(not isinstance(r, int) or r < 0 for r in self.radii):
            raise InvalidParameterError("radii must be nonnegative integers")
        if any(not isinstance(c, int) or c < 1 for c in self.g_caps):
            raise InvalidParameterError("g_caps must be positive integers")
        for name in ("C", "xi", "J"):
            v = getattr(self, name)
            if v != "auto" and (not isinstance(v, (int, float)) or v <= 0):
                raise InvalidParameterError(f"{name} must be 'auto' or a positive number, got {v!r}")
        bad = [s for s in self.stages if s not in STAGES]
        if bad:
            raise InvalidParameterError(f"unknown stages {bad}; valid stages: {', '.join(STAGES)}")

    def spec(self) -> GroupSpec:
        if isinstance(self.fixture, dict):
            try:
                return GroupSpec.from_dict(self.fixture)
            except (GroupError, KeyError, TypeError) as exc:
                raise InvalidParameterError(f"invalid inline group: {exc}") from exc
        return get_fixture(self.fixture)

    def to_dict(self) -> dict:
        return asdict(self)


def _requested(stages: list[str]) -> list[str]:
    """Requested stages in pipeline order."""
    return [s for s in STAGES if s in set(stages)]


@dataclass
class Workbench:
    """Shared state threaded through the stages."""

    config: ExperimentConfig
    group: Group
    ball: Any = None
    C: float = 1.0
    xi: float = 15
    J: float = 45
    weights: dict = field(default_factory=dict)
    universe: list = field(default_factory=list)
    table: Any = None
    complex: Any = None
    X: Any = None
    X_full: Any = None
    ball_x: Any = None
    K: list | None = None
    acyl_csv: str = ""


def _stage_ball(wb: Workbench) -> dict:
    cfg, group = wb.config, wb.group
    try:
        wb.ball = build_ball(group, cfg.radius, vertex_cap=cfg.vertex_cap)
    except BallSizeError as exc:
        raise CapExceededError(str(exc)) from exc
    wb.K = None if cfg.K is None else [group.normal_form(w) for w in cfg.K]
    out = {
        "radius": cfg.radius,
        "vertices": wb.ball.n_vertices,
        "edges": wb.ball.n_edges,
        "boundary": len(wb.ball.boundary()),
        "alphabet": [x.label for x in wb.ball.alphabet],
    }
    growth = {}
    for r in cfg.radii:
        b = wb.ball if r == cfg.radius else build_ball(group, r, vertex_cap=cfg.vertex_cap)
        row = {}
        for lam in range(1, group.n_subgroups + 1):
            gens = [h for h in group.subgroup_elements(lam) if h]
            row[f"H{lam}"] = {group.format(h): str(rel_distance(b, lam, group.identity, h)) for h in gens[:4]}
        growth[str(r)] = row
    if growth:
        out["rel_growth"] = growth
    return out


def _stage_relmetric(wb: Workbench) -> dict:
    cfg, group, ball = wb.config, wb.group, wb.ball
    est = estimate_C(ball, PolygonSample(n_polygons=cfg.polygons, seed=cfg.seed))
    wb.C = est.value if cfg.C == "auto" else float(cfg.C)
    out: dict = {"C_estimate": est.to_dict(), "C": wb.C, "subgroups": {}}
    for lam in range(1, group.n_subgroups + 1):
        rel = rel_from_identity(ball, lam)
        wt = modified_metric(group, lam, None, rel)
        wb.weights[lam] = wt
        elements = group.subgroup_elements(lam)
        radii = list(range(0, 5))
        out["subgroups"][f"H{lam}"] = {
            "rel_from_identity": {group.format(h): str(d) for h, d in rel.items()},
            "weights": {group.format(h): w for h, w in sorted(wt.weights.items(), key=lambda kv: group.sort_key(kv[0]))},
            "H0_size": len(wt.h0),
            "profile_rel": [asdict(r) for r in properness_profile(lambda h: rel[h], radii, elements, group, lam)],
            "profile_dw": [asdict(r) for r in properness_profile(wt.norm, radii, elements, group, lam)],
        }
    return out


def _stage_projection(wb: Workbench) -> dict:
    cfg, ball = wb.config, wb.ball
    wb.universe = enumerate_cosets(ball, wb.K)
    bounds = verify_projection_bounds(ball, wb.universe, wb.C)
    wb.C = bounds.C_final
    wb.xi = default_xi(wb.C) if cfg.xi == "auto" else float(cfg.xi)
    wb.table = build_projection_table(ball, wb.universe, wb.weights, wb.C, wb.xi)
    axioms = check_axioms(wb.table, wb.xi)
    growth = {str(x): a4_count(wb.table, x)[0] for x in (wb.xi, 2 * wb.xi, 4 * wb.xi)}
    return {
        "universe": [c.label(wb.group) for c in wb.universe],
        "bounds": bounds.to_dict(),
        "xi": wb.xi,
        "axioms": axioms.to_dict(),
        "A4_by_xi": growth,
    }


def _stage_complex(wb: Workbench) -> dict:
    cfg = wb.config
    wb.J = default_J(wb.C, wb.xi) if cfg.J == "auto" else float(cfg.J)
    wb.complex = build_complex(wb.table, wb.J, wb.xi)
    return wb.complex.to_dict()


def _stage_genset(wb: Workbench) -> dict:
    cfg, group, ball = wb.config, wb.group, wb.ball
    wb.X = construct_generating_set(wb.complex, ball)
    zk = z_cap_k(group, ball, wb.K)
    wb.X_full, completion = complete_generating_set(wb.X, zk, group, wb.weights, wb.J, wb.C, wb.xi)
    radius = cfg.genset_radius if cfg.genset_radius is not None else min(cfg.radius, 4)
    wb.ball_x = build_ball_over(group, wb.X_full, radius, vertex_cap=cfg.vertex_cap)
    members = subgroup_closure(ball, wb.K)
    core = [g for g in ball.core(ball.radius // 3) if g in members]
    emb = verify_embedding_bounds(wb.complex, wb.ball_x, core)
    alpha = default_alpha(wb.J, wb.xi, wb.C)
    al = verify_alpha_bound(wb.ball_x, wb.weights, alpha)
    missing = check_generation(wb.ball_x, core)
    return {
        "X": wb.X.to_dict(group),
        "X_completed": wb.X_full.to_dict(group),
        "symmetric": wb.X_full.is_symmetric(group),
        "avoids_H": wb.X.avoids_subgroups(group),
        "completion": completion.to_dict(group),
        "embedding": emb.to_dict(),
        "alpha": al.to_dict(),
        "generation_missing": [group.format(g) for g in missing],
    }


def _stage_coarse(wb: Workbench) -> dict:
    cfg, group, ball = wb.config, wb.group, wb.ball
    graph = FiniteGraph.on_elements(group, ball.elements, alphabet_over(group, wb.X_full))
    cert = bottleneck_constant(graph, n_pairs=cfg.bottleneck_pairs, seed=cfg.seed)
    delta = delta_hyperbolicity(graph, sample=min(graph.n, 200), seed=cfg.seed)
    index = {g: i for i, g in enumerate(ball.elements)}
    qc = {}
    for lam in range(1, group.n_subgroups + 1):
        S = [index[h] for h in group.subgroup_elements(lam) if h in index]
        r = quasi_convexity(graph, S)
        qc[f"H{lam}"] = {"epsilon": r.epsilon, "sigma": r.sigma, "exact": r.exact}
    return {
        "graph": {"vertices": graph.n, "edges": graph.n_edges},
        "bottleneck": cert.to_dict(),
        "delta_sampled": delta,
        "quasi_convexity": qc,
    }


def _stage_acyl(wb: Workbench) -> dict:
    cfg, group = wb.config, wb.group
    ball = wb.ball
    if cfg.acyl_radius is not None and cfg.acyl_radius != ball.radius:
        ball = build_ball(group, cfg.acyl_radius, vertex_cap=cfg.vertex_cap)
    pairs = candidate_pairs(ball, cfg.acyl_pairs, seed=cfg.seed)
    out = {"epsilon": cfg.acyl_epsilon, "R": cfg.acyl_R, "profiles": {}}
    csv_parts = []
    for cap in cfg.g_caps:
        prof = acylindricity_profile(ball, cfg.acyl_epsilon, cfg.acyl_R, cap, pairs=pairs)
        out["profiles"][str(cap)] = prof.to_dict(group)
        text = prof.to_csv(group)
        csv_parts.append(text if not csv_parts else text.split("\n", 1)[1])
    out["max_count_by_cap"] = {k: v["max_count"] for k, v in out["profiles"].items()}
    wb.acyl_csv = "".join(csv_parts)
    return out


RUNNERS = {
    "ball": _stage_ball,
    "relmetric": _stage_relmetric,
    "projection": _stage_projection,
    "complex": _stage_complex,
    "genset": _stage_genset,
    "coarse": _stage_coarse,
    "acyl": _stage_acyl,
}


def run_experiment(config: ExperimentConfig | dict) -> dict:
    """Run the configured stages; returns the report (timings under ``timings``)."""
    return run_pipeline(config)[0]


def run_pipeline(config: ExperimentConfig | dict) -> tuple[dict, Workbench]:
    """Like :func:`run_experiment` but also returns the in-memory objects."""
    if isinstance(config, dict):
        config = ExperimentConfig.from_dict(config)
    config.validate()
    spec = config.spec()
    group = Group(spec, hcap=config.hcap)
    wb = Workbench(config, group)
    report: dict = {
        "schema_version": SCHEMA_VERSION,
        "package_version": __version__,
        "config": config.to_dict(),
        "group": spec.to_dict(),
        "stages": {},
        "timings": {},
    }
    requested = _requested(config.stages)
    needed = set(requested)
    for s in requested:
        stack = list(DEPENDS[s])
        while stack:
            d = stack.pop()
            needed.add(d)
            stack.extend(DEPENDS[d])
    status: dict[str, str] = {}
    for stage in STAGES:
        if stage not in needed:
            continue
        blocked = [d for d in DEPENDS[stage] if status.get(d) != "ok"]
        if blocked:
            status[stage] = "skipped"
            report["stages"][stage] = {"status": "skipped", "reason": f"depends on failed stage {blocked[0]}"}
            continue
        t0 = time.perf_counter()
        try:
            result = RUNNERS[stage](wb)
            status[stage] = "ok"
            report["stages"][stage] = {"status": "ok", **result}
        except ConfigError:
            raise
        except Exception as exc:  # noqa: BLE001 - recorded per stage
            log.exception("stage %s failed", stage)
            status[stage] = "error"
            report["stages"][stage] = {"status": "error", "error": f"{type(exc).__name__}: {exc}"}
        report["timings"][stage] = round(time.perf_counter() - t0, 4)
    return report, wb


def strip_timings(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timings"}
