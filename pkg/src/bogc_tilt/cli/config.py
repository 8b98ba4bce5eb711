"""Strict JSON suite configuration."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

SUITES = ("bogc", "tilted", "bialternant", "cauchy-binet", "flows", "closure", "airy")

DEFAULT_M = 128
DEFAULT_TOL = 1e-8
DEFAULT_SEED = 0

# Per-suite option keys and their defaults.
SUITE_OPTIONS: dict[str, dict[str, Any]] = {
    "bogc": {"szego_times": [[0.3], [0.2, 0.05], [0.25, 0.02]]},
    "tilted": {"samples": 20, "max_degree": 3, "max_degenerate": 2},
    "bialternant": {"alphabet": [0.3, 0.5, 0.7], "phi_plus": [[], [0.2]], "max_weight": 5,
                    "tol": 1e-9, "beta_tol": 1e-10},
    "cauchy-binet": {"max_cutoff": 40, "gessel_plus": [[0.3], [0.2, 0.4]],
                     "gessel_minus": [[0.5, 0.1], [0.3, 0.2]]},
    "flows": {"times": [[0.3, 0.1], [0.2, 0.05]], "r": [1, 2], "M": 64, "N": 2, "tol": 1e-6},
    "closure": {"N": 3, "d": 2, "samples": 40, "time_box": [[0.1, 0.5], [0.05, 0.25]], "M": 48,
                "threshold": 1e-7, "expected": [12, 15]},
    "airy": {"w": [0.5, 1.0, 2.0], "s": [-2.0, 0.0, 1.0], "order": 60, "a": 0.25, "b": 0.02,
             "L_list": [50, 100, 200], "L_check": 20, "kernel_tol": 1e-9, "chain_tol": 1e-7},
}

TOP_LEVEL = ("suite", "symbol", "symbols", "tilts", "N_list", "M", "half_width", "tol", "seed",
             "output") + SUITES


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass(frozen=True)
class SuiteConfig:
    suites: tuple[str, ...]
    symbols: tuple[dict, ...] | None = None
    tilts: dict | None = None
    N_list: tuple[int, ...] | None = None
    M: int = DEFAULT_M
    half_width: int | None = None
    tol: float = DEFAULT_TOL
    seed: int = DEFAULT_SEED
    output: str | None = None
    options: dict[str, dict[str, Any]] = field(default_factory=dict)

    def suite_options(self, name: str) -> dict[str, Any]:
        merged = dict(SUITE_OPTIONS[name])
        merged.update(self.options.get(name, {}))
        return merged

    def to_json(self) -> dict:
        return {"suites": list(self.suites), "symbols": None if self.symbols is None else list(self.symbols),
                "tilts": self.tilts, "N_list": None if self.N_list is None else list(self.N_list),
                "M": self.M, "half_width": self.half_width, "tol": self.tol, "seed": self.seed,
                "options": {k: self.suite_options(k) for k in self.suites}}


def _reject_unknown(obj: dict, allowed, where: str) -> None:
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}; allowed: {', '.join(sorted(allowed))}")


def _number(v, where: str) -> complex:
    if isinstance(v, bool):
        raise ConfigError(f"{where}: expected a number, got {v!r}")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool)
                                                    for x in v):
        return complex(v[0], v[1])
    raise ConfigError(f"{where}: expected a real number or [re, im], got {v!r}")


def _int(v, where: str, minimum: int | None = None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}: expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{where}: must be >= {minimum}, got {v}")
    return v


def _positive(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
        raise ConfigError(f"{where}: expected a positive number, got {v!r}")
    return float(v)


def _symbol(sym, where: str) -> dict:
    if not isinstance(sym, dict):
        raise ConfigError(f"{where}: symbol must be an object")
    kind = sym.get("type")
    if kind == "exponential":
        _reject_unknown(sym, ("type", "times"), where)
        times = sym.get("times", [])
        if not isinstance(times, list):
            raise ConfigError(f"{where}.times: expected a list")
        vals = []
        for k, t in enumerate(times):
            if isinstance(t, bool) or not isinstance(t, (int, float)):
                raise ConfigError(f"{where}.times[{k}]: expected a real number, got {t!r}")
            vals.append(float(t))
        return {"type": "exponential", "times": vals}
    if kind == "rational":
        _reject_unknown(sym, ("type", "plus", "minus"), where)
        out = {"type": "rational"}
        for side in ("plus", "minus"):
            pts = sym.get(side, [])
            if not isinstance(pts, list):
                raise ConfigError(f"{where}.{side}: expected a list")
            vals = []
            for k, p in enumerate(pts):
                z = _number(p, f"{where}.{side}[{k}]")
                if not abs(z) < 1:
                    raise ConfigError(f"{where}.{side}[{k}]: |{p}| >= 1; rational factors need every "
                                      "point strictly inside the unit disk so phi_+ and phi_- stay "
                                      "analytic and nonvanishing on their sides")
                vals.append(z)
            out[side] = vals
        return out
    raise ConfigError(f"{where}.type: expected 'exponential' or 'rational', got {kind!r}")


def _tilts(sym, where: str) -> dict:
    if not isinstance(sym, dict):
        raise ConfigError(f"{where}: expected an object with 'xi' and 'theta'")
    _reject_unknown(sym, ("xi", "theta"), where)
    out = {}
    for side in ("xi", "theta"):
        rows = sym.get(side)
        if not isinstance(rows, list) or not rows:
            raise ConfigError(f"{where}.{side}: expected a nonempty list of coefficient arrays")
        parsed = []
        for i, row in enumerate(rows):
            if not isinstance(row, list) or not row:
                raise ConfigError(f"{where}.{side}[{i}]: expected a nonempty coefficient array")
            parsed.append([_number(c, f"{where}.{side}[{i}][{k}]") for k, c in enumerate(row)])
        out[side] = parsed
    if len(out["xi"]) != len(out["theta"]):
        raise ConfigError(f"{where}: xi and theta must have the same length")
    return out


def _options(name: str, raw) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"{name}: expected an object of suite options")
    _reject_unknown(raw, SUITE_OPTIONS[name], name)
    return dict(raw)


def config_from_dict(raw: dict) -> SuiteConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _reject_unknown(raw, TOP_LEVEL, "config")
    sel = raw.get("suite", [])
    if isinstance(sel, str):
        sel = [sel]
    if not isinstance(sel, list):
        raise ConfigError("suite: expected a suite name or a list of names")
    for s in sel:
        if s not in SUITES:
            raise ConfigError(f"suite: unknown suite {s!r}; available: {', '.join(SUITES)}")
    suites = tuple(s for s in SUITES if s in sel)
    if "symbol" in raw and "symbols" in raw:
        raise ConfigError("symbol: give either 'symbol' or 'symbols', not both")
    symbols = None
    if "symbol" in raw:
        symbols = (_symbol(raw["symbol"], "symbol"),)
    elif "symbols" in raw:
        if not isinstance(raw["symbols"], list) or not raw["symbols"]:
            raise ConfigError("symbols: expected a nonempty list")
        symbols = tuple(_symbol(s, f"symbols[{k}]") for k, s in enumerate(raw["symbols"]))
    tilts = _tilts(raw["tilts"], "tilts") if "tilts" in raw else None
    N_list = None
    if "N_list" in raw:
        if not isinstance(raw["N_list"], list) or not raw["N_list"]:
            raise ConfigError("N_list: expected a nonempty list of integers")
        N_list = tuple(_int(n, f"N_list[{k}]", 1) for k, n in enumerate(raw["N_list"]))
    M = _int(raw.get("M", DEFAULT_M), "M", 8)
    hw = raw.get("half_width")
    if hw is not None:
        hw = _int(hw, "half_width", 2 * M)
    tol = _positive(raw.get("tol", DEFAULT_TOL), "tol")
    seed = _int(raw.get("seed", DEFAULT_SEED), "seed", 0)
    if seed >= 2 ** 64:
        raise ConfigError("seed: must fit in 64 bits")
    output = raw.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output: expected a path string")
    options = {name: _options(name, raw[name]) for name in SUITES if name in raw}
    return SuiteConfig(suites=suites, symbols=symbols, tilts=tilts, N_list=N_list, M=M,
                       half_width=hw, tol=tol, seed=seed, output=output, options=options)


def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise ConfigError(f"duplicate key {k!r}")
        out[k] = v
    return out


def _no_constants(name):
    raise ConfigError(f"non-finite number {name} is not allowed")


def config_parse(path: str | Path) -> SuiteConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text, object_pairs_hook=_no_duplicates, parse_constant=_no_constants)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return config_from_dict(raw)
