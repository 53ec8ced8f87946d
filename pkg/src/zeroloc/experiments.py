"""Budgeted, finite-scale experiments over space configurations.

An :class:`ExperimentConfig` describes a node family, a weight rule, the
generating entire function, a scan region and the number of random trials.
Each ``run_*`` function turns one config into a :class:`Verdict` whose
ledger holds every number the decision was based on.  Runs are pure
functions of the config: the same config gives the same ledger.
"""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Mapping, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .entire import (EntireFunction, build_entire, eventually_decreasing,
                     hamburger_krein_check, shell_maxima)
from .kernel import PrecisionContext, ZerolocError, make_context, to_mpfr
from .nodes import Measure, NodeSet, attach_measure, generate_nodes, measure_rule, union
from .space import (excluded_terms, make_coefficients, make_element, moment,
                    orthogonal_coefficients, structured_element, tilde_measure)
from .zerofind import (Disk, LocalizationReport, Rect, classify_zeros,
                       compare_attraction_sets, default_budget, default_M,
                       region_from_config, scan_region)

SCHEMA_VERSION = 1
KINDS = ("strong_localization", "type2", "ordering", "hamburger_krein", "legendre",
         "weight_decay", "moment_orthogonality")
SCANNING = ("strong_localization", "type2", "ordering")
DECAY_EXPONENTS = (4, 8, 12, 16, 20)
STATUSES = ("pass", "fail", "inconclusive")


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    """One experiment.  ``space`` holds ``nodes``, ``radius``, ``measure``,
    ``entire`` and (for scanning kinds) ``region``; ``params`` holds the
    kind-specific knobs."""

    kind: str
    space: dict
    trials: int = 1
    seeds: list = field(default_factory=list)
    M: float | None = None
    budget: float | None = None
    precision: dict = field(default_factory=lambda: {"bits": 512})
    onset: int | None = None
    params: dict = field(default_factory=dict)
    name: str = ""
    schema: int = SCHEMA_VERSION

    def __post_init__(self) -> None:
        if self.schema != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema {self.schema!r}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if not isinstance(self.space, Mapping):
            raise ValueError("space must be an object")
        if int(self.trials) < 0:
            raise ValueError("trials must be nonnegative")
        self.trials = int(self.trials)
        self.seeds = [int(s) for s in self.seeds] or list(range(self.trials))
        if len(self.seeds) < self.trials:
            raise ValueError("need one seed per trial")
        if self.M is not None and not float(self.M) > 0:
            raise ValueError("M must be positive")
        if self.budget is not None and float(self.budget) < 0:
            raise ValueError("budget must be nonnegative")
        if self.onset is not None and int(self.onset) < 0:
            raise ValueError("onset must be nonnegative")
        self.context()

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> ExperimentConfig:
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        extra = sorted(set(d) - known)
        if extra:
            raise ValueError(f"unknown config keys: {', '.join(extra)}")
        if "kind" not in d or "space" not in d:
            raise ValueError("config needs 'kind' and 'space'")
        return cls(**d)

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"invalid JSON: {exc}") from exc
        if not isinstance(data, Mapping):
            raise ValueError("config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {"schema": self.schema, "name": self.name, "kind": self.kind,
                "space": self.space, "trials": self.trials, "seeds": self.seeds,
                "M": self.M, "budget": self.budget, "precision": self.precision,
                "onset": self.onset, "params": self.params}

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    def context(self) -> PrecisionContext:
        p = dict(self.precision or {})
        return make_context(int(p.get("bits", 512)), float(p.get("target_tol", 1e-40)))

    def with_bits(self, bits: int) -> ExperimentConfig:
        d = self.to_dict()
        d["precision"] = {**dict(self.precision or {}), "bits": int(bits)}
        return ExperimentConfig.from_dict(d)

    def validate(self) -> None:
        """Build everything cheap (nodes, rules, entire forms, region) to surface errors."""
        sp = build_space(self, measure=False)
        if self.kind in SCANNING:
            if sp.region is None:
                raise ValueError(f"{self.kind} needs space.region")
            reach = _region_reach(sp.region)
            if reach > sp.ns.radius / 4 * (1 + 1e-12):
                raise ValueError(f"region reaches |z| = {reach:g}, beyond radius/4 = "
                                 f"{sp.ns.radius / 4:g}")
        if self.kind == "type2" and self.params.get("second", "T2") in sp.parts:
            _partition(self, sp)
        if self.kind == "weight_decay" or "measure" in self.space:
            measure_rule(self.space.get("measure", {}))


def _region_reach(region) -> float:
    if isinstance(region, Disk):
        return abs(region.center) + region.radius
    return max(abs(c) for c in region.corners())


@dataclass
class Space:
    ns: NodeSet
    parts: dict
    A: EntireFunction | None
    mu: Measure | None
    region: Rect | Disk | None
    ctx: PrecisionContext


def build_nodes(spec: Mapping[str, Any], radius: float, ctx: PrecisionContext
                ) -> tuple[NodeSet, dict]:
    """``{"family": name, "params": {...}}`` or ``{"parts": {name: family spec}}``."""
    spec = dict(spec)
    if "parts" in spec:
        parts = {}
        for name, sub in dict(spec["parts"]).items():
            sub = dict(sub)
            r = float(sub.get("radius", radius))
            parts[str(name)] = generate_nodes(sub.get("family", ""), sub.get("params", {}), r, ctx)
        if len(parts) == 1:
            (name, only), = parts.items()
            return only, {name: only}
        # parts keep their family kind so part-level products get analytic tails;
        # both are sorted the same way, so part order matches ns.part_indices
        return union(*parts.values(), names=list(parts)), parts
    if "family" not in spec:
        raise ValueError("space.nodes needs 'family' or 'parts'")
    ns = generate_nodes(spec["family"], spec.get("params", {}), radius, ctx)
    return ns, {}


def build_space(cfg: ExperimentConfig, measure: bool = True) -> Space:
    ctx = cfg.context()
    sp = dict(cfg.space)
    if "nodes" not in sp or "radius" not in sp:
        raise ValueError("space needs 'nodes' and 'radius'")
    ns, parts = build_nodes(sp["nodes"], float(sp["radius"]), ctx)
    A = build_entire(sp["entire"], ns, parts, ctx.bits) if "entire" in sp else None
    region = region_from_config(sp["region"]) if sp.get("region") is not None else None
    mu = None
    if measure and "measure" in sp:
        ref: Any = A
        if "measure_entire" in sp:
            me = dict(sp["measure_entire"])
            if "form" in me:
                ref = build_entire(me, ns, parts, ctx.bits)
            else:
                ref = {k: build_entire(v, ns, parts, ctx.bits) for k, v in me.items()}
        mu = attach_measure(ns, sp["measure"], ref, ctx)
    return Space(ns, parts, A, mu, region, ctx)


@lru_cache(maxsize=4)
def _cached_space(cfg_json: str) -> Space:
    return build_space(ExperimentConfig.from_dict(json.loads(cfg_json)))


def _space_of(cfg: ExperimentConfig) -> Space:
    return _cached_space(cfg.canonical_json())


# ---------------------------------------------------------------------------
# verdicts


def _clean(x):
    """Make ledgers JSON-safe and deterministic."""
    if isinstance(x, Mapping):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [_clean(v) for v in items]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating, type(mpfr(0)))):
        v = float(x)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return x


@dataclass
class Verdict:
    kind: str
    status: str
    ledger: dict
    provenance: str
    budget: float | None = None
    reports: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.status not in STATUSES:
            raise ValueError(f"bad status {self.status!r}")

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "status": self.status, "budget": _clean(self.budget),
                "provenance": self.provenance, "ledger": _clean(self.ledger)}

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> Verdict:
        b = d.get("budget")
        return cls(d["kind"], d["status"], dict(d["ledger"]), d["provenance"],
                   None if b is None else float(b))


def _combine(statuses: Sequence[str]) -> str:
    if "fail" in statuses:
        return "fail"
    if "inconclusive" in statuses or not statuses:
        return "inconclusive"
    return "pass"


# ---------------------------------------------------------------------------
# trials


@dataclass
class TrialOutcome:
    label: str
    zeros: list
    cells: int = 0
    evaluations: int = 0
    error: str | None = None


def _element(sp: Space, cfg: ExperimentConfig, role: str, gen: str):
    if role == "structured":
        first, second, A1, A2 = _partition(cfg, sp)
        idx = sp.ns.part_indices(first)
        part = sp.parts[first]
        mt = tilde_measure(sp.mu, part, idx, A2)
        d = make_coefficients(gen, part)
        return structured_element(d, part, mt, A1)
    coeffs = make_coefficients(gen, sp.ns, sp.mu, sp.A)
    return make_element(coeffs, sp.ns, sp.mu, sp.A)


def _trial_job(cfg_json: str, role: str, gen: str, label: str) -> TrialOutcome:
    cfg = ExperimentConfig.from_dict(json.loads(cfg_json))
    sp = _cached_space(cfg_json)
    try:
        el = _element(sp, cfg, role, gen)
        if all(w == 0 for w in el.weights):
            return TrialOutcome(label, [], error="zero element")
        res = scan_region(el, sp.region, sp.ctx)
    except ZerolocError as exc:
        return TrialOutcome(label, [], error=f"{type(exc).__name__}: {exc}")
    return TrialOutcome(label, res.zeros, res.cells, res.evaluations)


def run_trials(cfg: ExperimentConfig, jobs: Sequence[tuple[str, str, str]], workers: int = 1
               ) -> list[TrialOutcome]:
    """Scan each (role, generator, label) job; results come back in job order."""
    key = cfg.canonical_json()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_trial_job, key, *j) for j in jobs]
            return [f.result() for f in futures]
    return [_trial_job(key, *j) for j in jobs]


def _summary(rep: LocalizationReport, out: TrialOutcome) -> dict:
    counts = rep.status_counts()
    return {"label": out.label, "zeros": len(rep.zeros), "strays": len(rep.strays),
            "multiple": counts["multiple_zeros"], "empty": counts["empty"],
            "exceptional_count": rep.exceptional_count,
            "attraction_size": len(rep.attraction_set), "dropped": rep.dropped,
            "cells": out.cells, "evaluations": out.evaluations}


def _M(cfg: ExperimentConfig, ns: NodeSet) -> float:
    return float(cfg.M) if cfg.M is not None else default_M(ns)


def _budget(cfg: ExperimentConfig, ns: NodeSet) -> float:
    return float(cfg.budget) if cfg.budget is not None else default_budget(len(ns))


def _generators(cfg: ExperimentConfig) -> list[str]:
    gens = cfg.params.get("coefficients")
    if gens is None:
        return [f"random_gaussian({s})" for s in cfg.seeds[:cfg.trials]]
    if isinstance(gens, str):
        gens = [gens]
    return [g if isinstance(g, str) else json.dumps(g) for g in gens]


# ---------------------------------------------------------------------------
# strong localization


def run_strong_localization(cfg: ExperimentConfig, workers: int = 1) -> Verdict:
    """Each trial passes when strays + multiple-zero disks + empty disks stay
    within the budget and every node from index ``onset`` on holds exactly
    one zero."""
    sp = _space_of(cfg)
    M, budget = _M(cfg, sp.ns), _budget(cfg, sp.ns)
    gens = _generators(cfg)
    jobs = [("generic", g, f"trial{j}") for j, g in enumerate(gens)]
    outcomes = run_trials(cfg, jobs, workers)
    trials, statuses, reports = [], [], {}
    for out in outcomes:
        if out.error:
            trials.append({"label": out.label, "error": out.error})
            statuses.append("inconclusive")
            continue
        rep = classify_zeros(out.zeros, sp.ns, M, sp.region)
        reports[out.label] = rep
        s = _summary(rep, out)
        empty = [i for i, st in rep.node_status.items() if st[0] == "empty"]
        not_one = sorted(i for i, st in rep.node_status.items() if st[0] != "one_zero")
        s["exceptions"] = rep.exceptional_count + len(empty)
        s["empirical_onset"] = (not_one[-1] + 1) if not_one else 0
        late = [i for i in not_one if cfg.onset is not None and i >= cfg.onset]
        s["late_failures"] = late
        ok = s["exceptions"] <= budget and not late
        s["status"] = "pass" if ok else "fail"
        statuses.append(s["status"])
        trials.append(s)
    ledger = {"M": M, "onset": cfg.onset, "nodes": len(sp.ns), "trials": trials}
    return Verdict(cfg.kind, _combine(statuses), ledger, cfg.digest, budget, reports)


# ---------------------------------------------------------------------------
# type 2


def _partition(cfg: ExperimentConfig, sp: Space):
    p = cfg.params
    first, second = p.get("first", "T1"), p.get("second", "T2")
    if first not in sp.parts:
        raise ValueError(f"partition part {first!r} is not a node part")
    A1 = build_entire(p["A1"], sp.ns, sp.parts, sp.ctx.bits) if "A1" in p else None
    A2 = build_entire(p["A2"], sp.ns, sp.parts, sp.ctx.bits) if "A2" in p else None
    if second in sp.parts and (A1 is None or A2 is None):
        raise ValueError("type2 needs params.A1 and params.A2")
    return first, second, A1, A2


def _hk_samples(radius: float, count: int) -> list[complex]:
    # offset the angles so samples avoid the axes and diagonals
    return [radius * complex(math.cos(a), math.sin(a))
            for a in (2 * math.pi * (j + 0.5) / count for j in range(count))]


def _type2_once(cfg: ExperimentConfig, workers: int) -> Verdict:
    sp = _space_of(cfg)
    first, second, A1, A2 = _partition(cfg, sp)
    M, budget = _M(cfg, sp.ns), _budget(cfg, sp.ns)
    T1 = set(sp.ns.part_indices(first))
    gens = _generators(cfg)
    n_struct = int(cfg.params.get("structured_trials", len(gens)))
    s_gens = [f"random_gaussian({s})" for s in (cfg.seeds * 2)[:n_struct]]
    jobs = ([("generic", g, f"generic{j}") for j, g in enumerate(gens)]
            + [("structured", g, f"structured{j}") for j, g in enumerate(s_gens)])
    outcomes = run_trials(cfg, jobs, workers)
    reports: dict = {}
    entries: dict = {"generic": [], "structured": []}
    statuses: dict = {"generic": [], "structured": []}
    for out in outcomes:
        role = "structured" if out.label.startswith("structured") else "generic"
        if out.error:
            entries[role].append({"label": out.label, "error": out.error})
            statuses[role].append("inconclusive")
            continue
        rep = classify_zeros(out.zeros, sp.ns, M, sp.region)
        reports[out.label] = rep
        entry = _summary(rep, out)
        att = set(rep.attraction_set)
        region_nodes = set(rep.node_status)
        if role == "structured":
            entry["outside_first"] = len(att - T1)
            entry["missing_first"] = len((region_nodes & T1) - att)
            ok = entry["outside_first"] <= budget and entry["missing_first"] <= budget
        else:
            entry["missing"] = len(region_nodes - att)
            ok = entry["missing"] <= budget
        ok = ok and rep.exceptional_count <= budget
        entry["status"] = "pass" if ok else "fail"
        entries[role].append(entry)
        statuses[role].append(entry["status"])
    st_a, st_b = _combine(statuses["generic"]), _combine(statuses["structured"])
    # (c) interpolation identity and derivative growth for A2
    R_s = float(cfg.params.get("hk_radius", _region_reach(sp.region) + 0.3))
    n_s = int(cfg.params.get("hk_samples", 20))
    tol = float(cfg.params.get("hk_tol", 1e-4))
    hk = hamburger_krein_check(A2, sp.parts[second], _hk_samples(R_s, n_s),
                               int(cfg.params.get("hk_M_max", 10)), sp.ctx)
    hk_ok = hk.residual <= tol and all(hk.decay_verdict.values())
    st_c = "pass" if hk_ok else "fail"
    ledger = {"M": M, "first": first, "second": second, "first_size": len(T1),
              "generic": entries["generic"], "structured": entries["structured"],
              "hamburger_krein": {**hk.to_dict(), "sample_radius": R_s, "tol": tol,
                                  "status": st_c},
              "subchecks": {"generic": st_a, "structured": st_b, "hamburger_krein": st_c},
              "bits": sp.ctx.bits}
    status = _combine([st_a, st_b, st_c])
    return Verdict(cfg.kind, status, ledger, cfg.digest, budget, reports)


def run_type2(cfg: ExperimentConfig, workers: int = 1, escalate: int = 4) -> Verdict:
    """Generic trials, structured first-part trials and the interpolation check
    on the second part's function; an inconclusive outcome is retried once at
    ``escalate`` times the bits."""
    sp = build_space(cfg, measure=False)
    second = cfg.params.get("second", "T2")
    if second not in sp.parts or len(sp.parts[second]) == 0:
        v = run_strong_localization(cfg, workers)
        v.ledger["delegated"] = "strong_localization"
        return v
    v = _type2_once(cfg, workers)
    if v.status == "inconclusive" and escalate > 1:
        bits = cfg.context().bits * escalate
        w = _type2_once(cfg.with_bits(bits), workers)
        w.provenance = cfg.digest
        w.ledger["escalated_from_bits"] = cfg.context().bits
        return w
    return v


# ---------------------------------------------------------------------------
# ordering


def ordering_verdict(sets: Mapping[str, set], budget: float, provenance: str = "",
                     expect_chain: int | None = None) -> Verdict:
    """Pairwise comparability of attraction sets and the chain they form.

    Sets whose symmetric differences both stay within the budget are the same
    class; the classes, ordered by size, must be nested up to the budget.
    """
    names = list(sets)
    pairs, statuses = [], []
    for a in range(len(names)):
        for b in range(a + 1, len(names)):
            c = compare_attraction_sets(sets[names[a]], sets[names[b]], budget)
            pairs.append({"a": names[a], "b": names[b], "relation": c.relation,
                          "k12": c.k12, "k21": c.k21})
            statuses.append("pass" if c.comparable else "fail")
    classes: list[list[str]] = []
    for n in sorted(names, key=lambda n: (-len(sets[n]), n)):
        for cl in classes:
            rep = sets[cl[0]]
            if max(len(rep - sets[n]), len(sets[n] - rep)) <= budget:
                cl.append(n)
                break
        else:
            classes.append([n])
    ledger = {"pairs": pairs, "classes": classes, "chain_length": len(classes),
              "sizes": {n: len(s) for n, s in sets.items()}}
    status = _combine(statuses) if statuses else "pass"
    if expect_chain is not None:
        ledger["expected_chain"] = expect_chain
        if status == "pass" and len(classes) != expect_chain:
            status = "fail"
    return Verdict("ordering", status, ledger, provenance, budget)


def run_ordering(cfg: ExperimentConfig, workers: int = 1) -> Verdict:
    """Attraction sets of every trial and of a few basis elements, compared pairwise."""
    sp = _space_of(cfg)
    M, budget = _M(cfg, sp.ns), _budget(cfg, sp.ns)
    jobs = [("generic", g, f"trial{j}") for j, g in enumerate(_generators(cfg))]
    if "A1" in cfg.params:
        _partition(cfg, sp)
        jobs += [("structured", f"random_gaussian({s})", f"structured{j}")
                 for j, s in enumerate(cfg.seeds[:cfg.trials])]
    for k in cfg.params.get("basis", [0]):
        jobs.append(("generic", f"basis({int(k)})", f"basis{int(k)}"))
    outcomes = run_trials(cfg, jobs, workers)
    sets, errors, reports = {}, {}, {}
    for out in outcomes:
        if out.error:
            errors[out.label] = out.error
            continue
        rep = classify_zeros(out.zeros, sp.ns, M, sp.region)
        reports[out.label] = rep
        sets[out.label] = set(rep.attraction_set)
    expect = cfg.params.get("expect_chain")
    v = ordering_verdict(sets, budget, cfg.digest, None if expect is None else int(expect))
    v.kind = cfg.kind
    v.reports = reports
    if errors:
        v.ledger["errors"] = errors
        if v.status == "pass":
            v.status = "inconclusive"
    return v


# ---------------------------------------------------------------------------
# weight decay


def decay_profile(moduli: np.ndarray, log_mu: np.ndarray, M: float) -> list[float]:
    """Quarter-octave shell maxima of log(μ_n (|t_n|+1)^M)."""
    return shell_maxima(moduli, log_mu + M * np.log(moduli + 1.0))


def run_weight_decay(cfg: ExperimentConfig, workers: int = 1) -> Verdict:
    """μ_n (|t_n|+1)^M eventually decreasing over the truncation, per node part."""
    sp = _space_of(cfg)
    if sp.mu is None:
        raise ValueError("weight_decay needs space.measure")
    Ms = [float(m) for m in cfg.params.get("exponents", DECAY_EXPONENTS)]
    groups = ({name: sp.ns.part_indices(name) for name in sp.ns.part_names}
              if sp.parts else {"all": list(range(len(sp.ns)))})
    logs = sp.mu.log_values
    parts, statuses = {}, []
    for name, idx in groups.items():
        idx = np.array(idx, dtype=int)
        mods = sp.ns.moduli[idx]
        per_M = {}
        for M in Ms:
            seq = decay_profile(mods, logs[idx], M)
            ok = eventually_decreasing(seq)
            per_M[f"{M:g}"] = {"decreasing": ok, "shells": len(seq),
                               "last": seq[-3:] if seq else []}
            statuses.append("pass" if ok else "fail")
        parts[name] = per_M
    failing = sorted({f"{n}:M={m}" for n, pm in parts.items() for m, r in pm.items()
                      if not r["decreasing"]})
    ledger = {"exponents": Ms, "parts": parts, "failing": failing}
    return Verdict(cfg.kind, _combine(statuses), ledger, cfg.digest)


# ---------------------------------------------------------------------------
# moments of the orthogonal sequence


def run_moment_orthogonality(cfg: ExperimentConfig, workers: int = 1) -> Verdict:
    """|Σ c_n μ_n t_n^k| against the excluded-term bound for k = 0..k_max.

    The bound at the configured radius is cross-checked against the explicit
    terms out to ``outer_factor`` times the radius plus the bound computed
    there; the two must agree within a factor of ten.
    """
    sp = _space_of(cfg)
    if sp.mu is None or sp.A is None:
        raise ValueError("moment_orthogonality needs space.measure and space.entire")
    k_max = int(cfg.params.get("k_max", 10))
    factor = float(cfg.params.get("outer_factor", 2))
    which = cfg.params.get("coefficients", "orthogonal")
    ctx = sp.ctx
    try:
        if which == "orthogonal":
            coeffs: Any = orthogonal_coefficients(sp.ns, sp.mu, sp.A, ctx)
        elif which == "ones":
            coeffs = [mpc(1)] * len(sp.ns)
        else:
            raise ValueError(f"unknown coefficient choice {which!r}")
        outer = None
        if which == "orthogonal" and sp.ns.kind not in ("explicit", "union"):
            d = cfg.to_dict()
            d["space"] = {**cfg.space, "radius": float(cfg.space["radius"]) * factor}
            d["space"].pop("region", None)
            outer = _space_of(ExperimentConfig.from_dict(d))
            outer_coeffs = orthogonal_coefficients(outer.ns, outer.mu, outer.A, ctx)
        rows, statuses = [], []
        for k in range(k_max + 1):
            rep = moment(coeffs, sp.ns, sp.mu, k, ctx)
            row = {"k": k, "value": float(abs(rep.value.value)), "tail_bound": rep.tail_bound,
                   "within": rep.within_tail}
            ok = rep.within_tail
            if outer is not None:
                _, explicit = excluded_terms(sp.A, sp.ns, k, outer.ns.radius, ctx)
                far = moment(outer_coeffs, outer.ns, outer.mu, k, ctx).tail_bound
                oracle = math.fsum(explicit) + far
                ratio = (max(rep.tail_bound, oracle) / min(rep.tail_bound, oracle)
                         if min(rep.tail_bound, oracle) > 0 else math.inf)
                row.update({"outer_oracle": oracle, "ratio": ratio})
                ok = ok and ratio <= 10
            row["status"] = "pass" if ok else "fail"
            statuses.append(row["status"])
            rows.append(row)
    except ZerolocError as exc:
        return Verdict(cfg.kind, "inconclusive", {"error": f"{type(exc).__name__}: {exc}"},
                       cfg.digest)
    ledger = {"coefficients": which, "outer_factor": factor, "moments": rows}
    return Verdict(cfg.kind, _combine(statuses), ledger, cfg.digest)


# ---------------------------------------------------------------------------
# interpolation identity


def run_hamburger_krein(cfg: ExperimentConfig, workers: int = 1) -> Verdict:
    """Residual of 1/A against its interpolation series at increasing truncations."""
    ctx = cfg.context()
    sp = _space_of(cfg)
    if sp.A is None:
        raise ValueError("hamburger_krein needs space.entire")
    radii = [float(r) for r in cfg.params.get("radii", [cfg.space["radius"]])]
    samples = _hk_samples(float(cfg.params.get("sample_radius", 5.3)),
                          int(cfg.params.get("samples", 20)))
    tol = float(cfg.params.get("tol", 1e-4))
    shrink = float(cfg.params.get("shrink", 1e3))
    rows = []
    for R in radii:
        d = cfg.to_dict()
        d["space"] = {**cfg.space, "radius": R}
        ns = _space_of(ExperimentConfig.from_dict(d)).ns
        hk = hamburger_krein_check(sp.A, ns, samples, int(cfg.params.get("M_max", 10)), ctx)
        rows.append({"radius": R, **hk.to_dict()})
    statuses = ["pass" if rows[0]["residual"] <= tol else "fail"]
    for a, b in zip(rows, rows[1:]):
        f = a["residual"] / b["residual"] if b["residual"] > 0 else math.inf
        b["shrink"] = f
        statuses.append("pass" if f >= shrink else "fail")
    ledger = {"tol": tol, "required_shrink": shrink, "rows": rows}
    return Verdict(cfg.kind, _combine(statuses), ledger, cfg.digest)


# ---------------------------------------------------------------------------
# Legendre transform


@dataclass(frozen=True)
class Weight:
    """An increasing convex weight: ``exp`` (e^{βt}), ``quadratic`` (a t²/2)
    or ``sampled`` (piecewise linear through ``t``/``w`` samples)."""

    form: str
    beta: float = 1.0
    t: tuple = ()
    w: tuple = ()

    def __post_init__(self) -> None:
        if self.form not in ("exp", "quadratic", "sampled"):
            raise ValueError(f"unknown weight form {self.form!r}")
        if self.form != "sampled" and not self.beta > 0:
            raise ValueError("weight parameter must be positive")
        if self.form == "sampled":
            if len(self.t) < 3 or len(self.t) != len(self.w):
                raise ValueError("sampled weight needs matching t and w (at least 3)")
            if any(b <= a for a, b in zip(self.t, self.t[1:])):
                raise ValueError("sample abscissae must increase")

    def __call__(self, t) -> mpfr:
        t = to_mpfr(t)
        if self.form == "exp":
            return gmpy2.exp(mpfr(self.beta) * t)
        if self.form == "quadratic":
            return mpfr(self.beta) * t * t / 2
        ts, ws = self.t, self.w
        if t <= ts[0]:
            j = 0
        elif t >= ts[-1]:
            j = len(ts) - 2
        else:
            j = int(np.searchsorted(ts, float(t))) - 1
            j = min(max(j, 0), len(ts) - 2)
        a, b = mpfr(ts[j]), mpfr(ts[j + 1])
        return mpfr(ws[j]) + (mpfr(ws[j + 1]) - mpfr(ws[j])) * (t - a) / (b - a)

    def closed_form(self, x) -> mpfr | None:
        x = to_mpfr(x)
        if self.form == "exp":
            b = mpfr(self.beta)
            if x <= b:
                return -self(0)  # the supremum sits at t = 0
            return x / b * (gmpy2.log(x / b) - 1)
        if self.form == "quadratic":
            return x * x / (2 * mpfr(self.beta)) if x > 0 else -self(0)
        return None

    def to_config(self) -> dict:
        if self.form == "sampled":
            return {"form": "sampled", "t": list(self.t), "w": list(self.w)}
        return {"form": self.form, "beta": self.beta}


def weight_from_config(d: Mapping[str, Any]) -> Weight:
    d = dict(d)
    form = d.get("form")
    if form == "sampled":
        return Weight("sampled", t=tuple(float(v) for v in d["t"]),
                      w=tuple(float(v) for v in d["w"]))
    return Weight(str(form), float(to_mpfr(d.get("beta", d.get("a", 1)))))


def _unimodal(vals: Sequence, slack) -> bool:
    """True when vals rise then fall (ties within ``slack`` allowed)."""
    k = max(range(len(vals)), key=lambda i: vals[i])
    up = all(vals[i + 1] >= vals[i] - slack for i in range(k))
    down = all(vals[i + 1] <= vals[i] + slack for i in range(k, len(vals) - 1))
    return up and down


def legendre_transform(w: Weight | Callable, x, method: str = "auto", bits: int = 256) -> mpfr:
    """sup over t >= 0 of x·t - w(t).

    Closed forms are used when ``w`` has one and ``method`` is ``"auto"``;
    otherwise the concave objective is maximised by golden-section search
    after bracketing by doubling.  A probe grid that is not unimodal raises
    ``ValueError("not convex")``.
    """
    with make_context(bits).local():
        x = to_mpfr(x)
        if method == "auto" and isinstance(w, Weight):
            v = w.closed_form(x)
            if v is not None:
                return v

        def phi(t):
            return x * t - w(t)

        if isinstance(w, Weight) and w.form == "sampled":
            ts = [mpfr(t) for t in w.t if t >= 0]
            vals = [phi(t) for t in ts]
            scale = max(abs(v) for v in vals) + 1
            if not _unimodal(vals, scale * gmpy2.mul_2exp(mpfr(1), 20 - bits)):
                raise ValueError("not convex")
            hi = ts[-1]
        else:
            # for a concave objective, phi(2h) <= phi(h) puts the maximum in [0, 2h]
            hi = mpfr(1)
            while phi(2 * hi) > phi(hi):
                hi *= 2
                if hi > 2 ** 64:
                    raise ValueError("supremum not attained: objective keeps increasing")
            hi *= 2
            grid = [hi * j / 32 for j in range(33)]
            vals = [phi(t) for t in grid]
            scale = max(abs(v) for v in vals) + 1
            if not _unimodal(vals, scale * gmpy2.mul_2exp(mpfr(1), 20 - bits)):
                raise ValueError("not convex")
        a, b = mpfr(0), mpfr(hi)
        g = (gmpy2.sqrt(mpfr(5)) - 1) / 2
        c, d = b - g * (b - a), a + g * (b - a)
        fc, fd = phi(c), phi(d)
        stop = gmpy2.mul_2exp(max(b, mpfr(1)), -bits // 2 - 8)
        while b - a > stop:
            if fc >= fd:
                b, d, fd = d, c, fc
                c = b - g * (b - a)
                fc = phi(c)
            else:
                a, c, fc = c, d, fd
                d = a + g * (b - a)
                fd = phi(d)
        return max(fc, fd, phi(a), phi(b))


def log_grid(lo: float, hi: float, n: int) -> list[float]:
    return [float(v) for v in np.geomspace(lo, hi, n)]


def check_tech_condition(w: Weight, xs: Sequence[float] | None = None,
                         ts: Sequence[float] = (0.0, 0.5, 1.0), bits: int = 256) -> Verdict:
    """Best constant c in w#(x+t) - w#(x) <= c·w(x)/x over a log grid.

    Passes when the ratio stays bounded along the grid: its maximum over the
    upper half of the grid is at most twice its maximum over the lower half.
    """
    xs = list(xs) if xs is not None else log_grid(1.0, 1e6, 61)
    ratios = []
    with make_context(bits).local():
        for x in xs:
            wx = w(x)
            base = legendre_transform(w, x, bits=bits)
            r = mpfr(0)
            for t in ts:
                if t == 0:
                    continue
                diff = legendre_transform(w, x + t, bits=bits) - base
                r = max(r, diff * mpfr(x) / wx)
            ratios.append(r)
    half = len(ratios) // 2
    lo = max(ratios[:half]) if half else mpfr(0)
    hi = max(ratios[half:])
    ok = bool(gmpy2.is_finite(hi)) and hi <= 2 * lo + gmpy2.mul_2exp(mpfr(1), -bits // 2)
    ledger = {"weight": w.to_config(), "best_constant": float(max(ratios)),
              "lower_half_max": float(lo), "upper_half_max": float(hi),
              "grid": [xs[0], xs[-1], len(xs)], "shifts": list(ts)}
    return Verdict("legendre", "pass" if ok else "fail", ledger, "")


def run_legendre(cfg: ExperimentConfig, workers: int = 1) -> Verdict:
    """Numeric transform against the closed form plus the growth condition, per weight."""
    weights = [weight_from_config(d) for d in cfg.params.get(
        "weights", [{"form": "exp", "beta": 1}, {"form": "exp", "beta": 2},
                    {"form": "quadratic", "beta": 1}])]
    n = int(cfg.params.get("grid", 100))
    tol = float(cfg.params.get("tol", 1e-12))
    bits = max(cfg.context().bits, 256)
    rows, statuses = [], []
    for w in weights:
        row: dict = {"weight": w.to_config()}
        lo = w.beta if w.form == "exp" else 1.0
        if w.form != "sampled":
            err = mpfr(0)
            with make_context(bits).local():
                for x in log_grid(lo, 1e6, n):
                    err = max(err, abs(legendre_transform(w, x, "numeric", bits)
                                       - legendre_transform(w, x, "auto", bits)))
            row["max_abs_error"] = float(err)
            statuses.append("pass" if err <= tol else "fail")
        tech = check_tech_condition(w, bits=bits)
        row["tech"] = tech.ledger
        row["tech_status"] = tech.status
        statuses.append(tech.status)
        rows.append(row)
    return Verdict(cfg.kind, _combine(statuses), {"tol": tol, "grid": n, "weights": rows},
                   cfg.digest)


# ---------------------------------------------------------------------------
# dispatch


RUNNERS: dict[str, Callable[..., Verdict]] = {
    "strong_localization": run_strong_localization,
    "type2": run_type2,
    "ordering": run_ordering,
    "hamburger_krein": run_hamburger_krein,
    "legendre": run_legendre,
    "weight_decay": run_weight_decay,
    "moment_orthogonality": run_moment_orthogonality,
}


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> Verdict:
    cfg.validate()
    return RUNNERS[cfg.kind](cfg, workers=workers)
