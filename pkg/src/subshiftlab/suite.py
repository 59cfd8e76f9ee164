"""Declarative probe suites and the classification report."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import yaml

from .factor import extract_periodic_structure, regularity_check, sturmian_fiber_ambiguity
from .probes import DEFAULT_RADII, diam_mean_probe, mean_equicontinuity_scan
from .seqentropy import BudgetExhausted, independence_search
from .systems import SturmianInfo, SubshiftModel, build_model
from .verdict import ProbeVerdict, Verdict

__all__ = [
    "SuiteConfig",
    "ClassificationRow",
    "ConfigError",
    "run_suite",
    "emit_report",
    "builtin_suite",
    "load_config",
    "chain_consistent",
    "PROBE_KINDS",
]


class ConfigError(ValueError):
    pass


@dataclass
class SuiteConfig:
    systems: list[dict]
    probes: list[dict]
    seed: int
    horizon: int = 1 << 20
    budget: int = 64
    node_budget: int = 100_000
    format: str = "json"

    def __post_init__(self):
        if self.seed is None:
            raise ConfigError("seed is mandatory")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        labels = set()
        for decl in self.systems:
            if "name" not in decl:
                raise ConfigError(f"system declaration without a name: {decl}")
            try:
                _builder_known(decl["name"])
            except KeyError as exc:
                raise ConfigError(str(exc)) from None
            labels.add(decl.get("label", decl["name"]))
        for p in self.probes:
            if p.get("kind") not in PROBE_KINDS:
                raise ConfigError(f"unknown probe kind {p.get('kind')!r}; choose from {sorted(PROBE_KINDS)}")
            for target in p.get("systems", []):
                if target not in labels:
                    raise ConfigError(f"probe {p['kind']} targets unknown system {target!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "SuiteConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping")
        known = {"systems", "probes", "seed", "horizon", "budget", "node_budget", "format"}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        if "seed" not in data:
            raise ConfigError("seed is mandatory")
        return cls(**{k: data[k] for k in known if k in data})


def _builder_known(name: str) -> bool:
    from .systems import _BUILDERS

    if name not in _BUILDERS:
        raise KeyError(f"unknown model {name!r}; choose from {sorted(_BUILDERS)}")
    return True


def load_config(path: str | Path) -> SuiteConfig:
    text = Path(path).read_text()
    data = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    return SuiteConfig.from_dict(data)


@dataclass
class ClassificationRow:
    system: str
    model: dict
    verdicts: dict[str, ProbeVerdict]
    errors: dict[str, str] = field(default_factory=dict)

    @property
    def chain_consistent(self) -> bool:
        return chain_consistent(self.verdicts)

    def to_json(self) -> dict:
        return {
            "system": self.system,
            "model": self.model,
            "verdicts": {k: v.to_json() for k, v in self.verdicts.items()},
            "errors": self.errors,
            "chain_consistent": self.chain_consistent,
        }


def chain_consistent(verdicts: dict[str, ProbeVerdict]) -> bool:
    """False exactly when null passes while diam-mean fails, or diam-mean
    passes while mean equicontinuity fails."""
    by_kind: dict[str, list[Verdict]] = {}
    for v in verdicts.values():
        by_kind.setdefault(v.probe_name, []).append(v.verdict)
    has = lambda kind, verdict: verdict in by_kind.get(kind, [])
    if has("null", Verdict.PASS) and has("diam_mean", Verdict.FAIL):
        return False
    if has("diam_mean", Verdict.PASS) and has("mean_eq", Verdict.FAIL):
        return False
    return True


# ---------------------------------------------------------------------------
# probe runners


def _point(model: SubshiftModel, spec: Any):
    if spec is None:
        return model.generators[0]
    if isinstance(spec, int):
        return model.generators[spec]
    from .specs import parse_point

    return parse_point(str(spec))


def _word(model: SubshiftModel, spec: Any, default_len: int = 8) -> str:
    if spec is None:
        spec = f"prefix:{default_len}"
    spec = str(spec)
    if spec.startswith("prefix:"):
        return model.generators[0].to_text(int(spec.split(":", 1)[1]))
    return spec


def _run_mean_eq(model, p, cfg):
    x = _point(model, p.get("point"))
    radii = p.get("radii", [p["m"]] if "m" in p else list(DEFAULT_RADII))
    return mean_equicontinuity_scan(
        model, x, Fraction(str(p.get("epsilon", "0.1"))), radii, p.get("budget", cfg.budget), p.get("horizon", cfg.horizon), cfg.seed
    )


def _run_diam_mean(model, p, cfg):
    return diam_mean_probe(
        model,
        _word(model, p.get("u")),
        int(p.get("r", 1)),
        p.get("horizon", cfg.horizon),
        p.get("statistic", "limsup"),
        p.get("max_occurrences", 512),
    )


def _run_independence(model, p, cfg):
    k = int(p.get("k", 3))
    max_k = int(p.get("max_k", k))
    horizon = p.get("horizon", 1 << 16)
    node_budget = p.get("node_budget", cfg.node_budget)
    params = {"u": str(p.get("u", "0")), "v": str(p.get("v", "1")), "k": k, "max_k": max_k, "node_budget": node_budget, "horizon": horizon}
    if "position_bound" in p:
        params["position_bound"] = p["position_bound"]
    try:
        cert = independence_search(model, params["u"], params["v"], max_k, horizon, node_budget, p.get("position_bound"))
    except BudgetExhausted as exc:
        size = exc.best.size if exc.best else 0
        if size >= k:
            return ProbeVerdict("null", params, Verdict.FAIL, statistic=size, witness=exc.best, notes={"outcome": "certificate"})
        return ProbeVerdict("null", params, Verdict.INCONCLUSIVE, statistic=size, notes={"outcome": "budget_exhausted", "nodes": exc.nodes})
    size = cert.size if cert else 0
    # a certificate of size k refutes nullness; an exhaustive search without one is evidence for it
    if size >= k:
        return ProbeVerdict("null", params, Verdict.FAIL, statistic=size, witness=cert, notes={"outcome": "certificate"})
    return ProbeVerdict("null", params, Verdict.PASS, statistic=size, notes={"outcome": "none", "largest": size})


def _run_regularity(model, p, cfg):
    horizon = p.get("horizon", cfg.horizon)
    ps = extract_periodic_structure(model.generators[0], int(p.get("max_period", 64)), horizon, p.get("max_pattern"))
    v = regularity_check(ps, Fraction(str(p.get("tolerance", "1/512"))))
    v.notes["structure"] = ps.to_json()
    return v


def _run_fiber(model, p, cfg):
    info = model.side_info
    if not isinstance(info, SturmianInfo):
        raise ValueError("fiber probe needs a Sturmian model")
    horizon = p.get("horizon", cfg.horizon)
    delta = Fraction(str(p.get("delta", "0.01")))
    rep = sturmian_fiber_ambiguity(info.alpha, info.beta, delta, horizon)
    params = {"delta": delta, "horizon": horizon, "threshold": rep.threshold}
    stat = rep.ambiguity_density.limsup_est
    witness = None if rep.regular_verdict is Verdict.PASS else {"density": stat}
    return ProbeVerdict("fiber", params, rep.regular_verdict, statistic=stat, witness=witness)


PROBE_KINDS = {
    "mean_eq": _run_mean_eq,
    "diam_mean": _run_diam_mean,
    "independence": _run_independence,
    "regularity": _run_regularity,
    "fiber": _run_fiber,
}


def run_suite(config: SuiteConfig) -> list[ClassificationRow]:
    """Run every declared probe on every system it targets, in config order.

    A probe that raises is recorded under ``errors``; the suite continues.
    """
    rows = []
    for decl in config.systems:
        label = decl.get("label", decl["name"])
        model = build_model(decl)
        verdicts: dict[str, ProbeVerdict] = {}
        errors: dict[str, str] = {}
        for p in config.probes:
            targets = p.get("systems")
            if targets is not None and label not in targets:
                continue
            key = p.get("label", p["kind"])
            try:
                v = PROBE_KINDS[p["kind"]](model, p, config)
            except Exception as exc:  # recorded, never fatal
                errors[key] = f"{type(exc).__name__}: {exc}"
                continue
            v.parameters.setdefault("horizon", config.horizon)
            v.parameters.setdefault("seed", config.seed)
            v.parameters.setdefault("budget", p.get("budget", config.budget))
            verdicts[key] = v
        rows.append(ClassificationRow(label, model.describe(), verdicts, errors))
    return rows


def emit_report(rows: list[ClassificationRow], format: str = "json") -> str:
    if not rows:
        raise ValueError("no rows to report")
    if format == "json":
        return json.dumps([r.to_json() for r in rows], sort_keys=True, indent=2) + "\n"
    if format == "csv":
        # sorted so a report re-rendered from JSON has the same columns
        keys = sorted({k for r in rows for k in r.verdicts})
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["system", "chain_consistent", "seed"]
        for k in keys:
            header += [f"{k}.verdict", f"{k}.statistic", f"{k}.horizon"]
        header.append("errors")
        w.writerow(header)
        for r in rows:
            seed = next((v.parameters.get("seed") for v in r.verdicts.values()), "")
            line = [r.system, str(r.chain_consistent).lower(), seed]
            for k in keys:
                v = r.verdicts.get(k)
                if v is None:
                    line += ["", "", ""]
                    continue
                stat = "" if v.statistic is None else repr(round(float(v.statistic), 12))
                line += [v.verdict.value, stat, v.parameters.get("horizon", "")]
            line.append(";".join(f"{k}={e}" for k, e in sorted(r.errors.items())))
            w.writerow(line)
        return buf.getvalue()
    raise ValueError(f"unknown format {format!r}")


def builtin_suite(seed: int = 0, horizon: int = 1 << 20) -> SuiteConfig:
    """The three example systems with the probes that classify them."""
    return SuiteConfig(
        systems=[{"name": "single_one"}, {"name": "powers", "seed": seed}, {"name": "regular_toeplitz", "horizon": horizon}],
        probes=[
            {"kind": "mean_eq", "systems": ["single_one"], "epsilon": "0.1", "point": 0},
            {"kind": "mean_eq", "systems": ["powers"], "epsilon": "0.1", "point": 1},
            {"kind": "diam_mean", "systems": ["single_one"], "u": "0000", "r": 1},
            {"kind": "diam_mean", "systems": ["regular_toeplitz"], "u": "prefix:8", "r": 1},
            # ten levels of the structure need two full periods of a 10*2^10 word at spacing 2^10
            {"kind": "regularity", "systems": ["regular_toeplitz"], "max_period": 1024, "horizon": 1 << 25, "tolerance": "1/512"},
            {"kind": "independence", "systems": ["powers"], "k": 4, "u": "0", "v": "1"},
            {"kind": "independence", "systems": ["regular_toeplitz"], "k": 3, "u": "0", "v": "1"},
        ],
        seed=seed,
        horizon=horizon,
    )
