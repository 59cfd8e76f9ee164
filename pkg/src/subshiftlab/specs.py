"""Compact text specs for points and systems used on the command line.

Points::

    constant:0   periodic:01   support:5,7   powers   random:SEED
    sturmian:ALPHA:BETA   toeplitz   file:PATH

Systems::

    single_one   powers   toeplitz   full_shift   sturmian:ALPHA:BETA
"""
from __future__ import annotations

from pathlib import Path

from .points import SymbolicPoint
from .systems import SubshiftModel, build_model, powers_subshift, regular_toeplitz_example, sturmian_model

__all__ = ["parse_point", "parse_system", "parse_positions"]


def parse_point(spec: str) -> SymbolicPoint:
    kind, _, rest = spec.partition(":")
    if kind == "constant":
        return SymbolicPoint.constant(int(rest or 0))
    if kind == "periodic":
        return SymbolicPoint.periodic(rest)
    if kind == "support":
        return SymbolicPoint.from_support([int(v) for v in rest.split(",") if v])
    if kind == "powers":
        return powers_subshift().generators[1]
    if kind == "random":
        return SymbolicPoint.bernoulli(int(rest or 0))
    if kind == "sturmian":
        alpha, _, beta = rest.partition(":")
        return sturmian_model(alpha or "golden", beta or 0).generators[0]
    if kind == "toeplitz":
        return regular_toeplitz_example().generators[0]
    if kind == "file":
        return SymbolicPoint.from_text(Path(rest).read_text().strip())
    raise ValueError(f"unknown point spec {spec!r}")


def parse_system(spec: str, horizon: int | None = None) -> SubshiftModel:
    kind, _, rest = spec.partition(":")
    if kind == "sturmian":
        alpha, _, beta = rest.partition(":")
        return sturmian_model(alpha or "golden", beta or 0)
    if kind in ("toeplitz", "regular_toeplitz") and horizon is not None:
        return regular_toeplitz_example(horizon)
    return build_model(kind)


def parse_positions(spec: str) -> list[int]:
    """``a:b`` (range), ``pow2:n`` (2, 4, ..., 2^n) or a comma list."""
    if spec.startswith("pow2:"):
        return [1 << k for k in range(1, int(spec[5:]) + 1)]
    if ":" in spec:
        a, b = spec.split(":")
        return list(range(int(a), int(b)))
    return [int(v) for v in spec.split(",") if v]
