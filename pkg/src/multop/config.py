"""JSON problem configs (schema version 1).

    {
      "version": 1,
      "space":  {"mode": "finite", "atoms": [...], "weights": [...], "nonatomic": false}
              | {"mode": "finite", "uniform": {"n": 20, "lo": 0, "hi": 1}, "nonatomic": true}
              | {"mode": "sequence", "truncation": 50,
                 "weight_rule": {"type": "geometric", "ratio": 0.5}},
      "symbol": {"kind": "constant", "matrix": [[...]]}
              | {"kind": "table", "matrices": [[[...]], ...]}
              | {"kind": "expr", "matrix": [["1/x", "0"], ["0", "x"]]},
                optional "tail": {"norm": "1/x", "monotone": "decreasing", "limit": 0,
                                  "spectral_abscissa": ..., "spectral_radius": ...,
                                  "limit_matrix": [[...]]},
      "norm":   {"type": "lp", "p": 2} | {"type": "orlicz", "phi": "tp_log", "p": 2}
              | {"type": "lorentz", "p": 2, "q": 1},
      "task":   {"t_grid": [...], "initial": [...], "lambda": {"re": 3, "im": 0},
                 "m": 2, "tol": 1e-9, "trials": 100}
    }

Scalars are numbers, ``{"re": .., "im": ..}`` objects or expression strings;
``"inf"`` is accepted wherever a norm exponent may be infinite.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dsl import Num, ParseError, parse
from .function_space import NormSpec, VectorFunction
from .measure import MeasureSpace
from .symbol import SymbolFunction, TailEnvelope

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


@dataclass
class Task:
    t_grid: list[float] = field(default_factory=lambda: [0.0, 1.0])
    initial: object = None
    lam: complex | None = None
    m: int | None = None
    tol: float = 1e-9
    trials: int = 100


@dataclass
class ProblemConfig:
    space: MeasureSpace
    symbol: SymbolFunction
    norm: NormSpec
    task: Task

    def initial_function(self) -> VectorFunction:
        """The task's initial value; a single vector is used on every atom."""
        n, dim = self.space.n_atoms, self.symbol.dim
        if self.task.initial is None:
            raise ConfigError("task.initial", "missing")
        arr = _complex_array(self.task.initial, "task.initial")
        if arr.shape == (dim,):
            arr = np.broadcast_to(arr, (n, dim))
        elif arr.shape == (n,) and dim == 1:
            arr = arr[:, None]
        if arr.shape != (n, dim):
            raise ConfigError("task.initial", f"expected {dim} components or an ({n}, {dim}) array")
        if not np.all(np.isfinite(arr)):
            raise ConfigError("task.initial", "values must be finite")
        return VectorFunction(self.space, np.array(arr))


# ---------------------------------------------------------------------------
# scalar helpers

def _scalar(v, key: str) -> complex:
    if isinstance(v, bool):
        raise ConfigError(key, "expected a number")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, dict):
        extra = set(v) - {"re", "im"}
        if extra:
            raise ConfigError(f"{key}.{sorted(extra)[0]}", "unknown field in complex number")
        return complex(_real(v.get("re", 0.0), f"{key}.re"), _real(v.get("im", 0.0), f"{key}.im"))
    if isinstance(v, str):
        try:
            e = parse(v)
        except ParseError as exc:
            raise ConfigError(key, str(exc)) from None
        if "x" in e.variables():
            raise ConfigError(key, "constant entry must not depend on x")
        return complex(e(np.zeros(1))[0])
    raise ConfigError(key, f"expected a number, got {type(v).__name__}")


def _real(v, key: str, allow_inf: bool = False) -> float:
    if allow_inf and v in ("inf", "+inf"):
        return math.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, "expected a real number")
    return float(v)


def _int(v, key: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(key, "expected an integer")
    return v


def _complex_array(v, key: str) -> np.ndarray:
    def walk(x, k):
        if isinstance(x, list):
            return [walk(y, f"{k}[{i}]") for i, y in enumerate(x)]
        return _scalar(x, k)

    try:
        return np.array(walk(v, key), dtype=complex)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(key, "ragged array") from None


def _get(d: dict, name: str, prefix: str, required: bool = True, default=None):
    if not isinstance(d, dict):
        raise ConfigError(prefix, "expected an object")
    if name not in d:
        if required:
            raise ConfigError(f"{prefix}.{name}" if prefix else name, "missing")
        return default
    return d[name]


# ---------------------------------------------------------------------------
# sections

def parse_space(d) -> MeasureSpace:
    mode = _get(d, "mode", "space")
    try:
        if mode == "finite":
            nonatomic = bool(_get(d, "nonatomic", "space", False, False))
            if "uniform" in d:
                uni = d["uniform"]
                n = _int(_get(uni, "n", "space.uniform"), "space.uniform.n")
                return MeasureSpace.uniform(n, _real(_get(uni, "lo", "space.uniform", False, 0.0), "space.uniform.lo"),
                                            _real(_get(uni, "hi", "space.uniform", False, 1.0), "space.uniform.hi"),
                                            nonatomic)
            atoms = _get(d, "atoms", "space")
            if not isinstance(atoms, list) or not atoms:
                raise ConfigError("space.atoms", "expected a non-empty list")
            coords = [_real(a, f"space.atoms[{i}]") for i, a in enumerate(atoms)]
            weights = _get(d, "weights", "space", False)
            if weights is not None:
                if not isinstance(weights, list) or len(weights) != len(coords):
                    raise ConfigError("space.weights", "must list one weight per atom")
                weights = [_real(w, f"space.weights[{i}]") for i, w in enumerate(weights)]
            return MeasureSpace.finite(coords, weights, nonatomic)
        if mode == "sequence":
            k = _int(_get(d, "truncation", "space"), "space.truncation")
            rule = _get(d, "weight_rule", "space", False, {"type": "geometric", "ratio": 0.5})
            kind = _get(rule, "type", "space.weight_rule")
            if kind == "geometric":
                ratio = _real(_get(rule, "ratio", "space.weight_rule"), "space.weight_rule.ratio")
                return MeasureSpace.sequence(k, "geometric", ratio=ratio)
            if kind == "power":
                exponent = _real(_get(rule, "exponent", "space.weight_rule"), "space.weight_rule.exponent")
                return MeasureSpace.sequence(k, "power", exponent=exponent)
            raise ConfigError("space.weight_rule.type", f"unknown rule {kind!r}")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("space", str(exc)) from None
    raise ConfigError("space.mode", f"expected 'finite' or 'sequence', got {mode!r}")


def parse_tail(d) -> TailEnvelope:
    norm = _get(d, "norm", "symbol.tail")
    if isinstance(norm, str):
        try:
            norm = parse(norm)
        except ParseError as exc:
            raise ConfigError("symbol.tail.norm", str(exc)) from None
    else:
        norm = _real(norm, "symbol.tail.norm")
    opt = {}
    for name in ("spectral_abscissa", "spectral_radius"):
        if name in d:
            opt[name] = _real(d[name], f"symbol.tail.{name}", allow_inf=True)
    if "limit_matrix" in d:
        opt["limit_matrix"] = _complex_array(d["limit_matrix"], "symbol.tail.limit_matrix")
    try:
        return TailEnvelope(norm, _get(d, "monotone", "symbol.tail", False, "decreasing"),
                            _real(_get(d, "limit", "symbol.tail", False, 0.0), "symbol.tail.limit", allow_inf=True),
                            **opt)
    except ValueError as exc:
        raise ConfigError("symbol.tail", str(exc)) from None


def parse_symbol(d, space: MeasureSpace) -> SymbolFunction:
    kind = _get(d, "kind", "symbol")
    tail = parse_tail(d["tail"]) if isinstance(d, dict) and "tail" in d else None
    try:
        if kind == "constant":
            m = _complex_array(_get(d, "matrix", "symbol"), "symbol.matrix")
            if m.ndim == 0:
                m = m.reshape(1, 1)
            u = SymbolFunction.constant(space, m)
            return SymbolFunction(space, u.dim, "constant", u.data, tail) if tail else u
        if kind == "table":
            arr = _complex_array(_get(d, "matrices", "symbol"), "symbol.matrices")
            if arr.ndim == 1:
                arr = arr[:, None, None]
            if arr.ndim != 3 or arr.shape[0] != space.n_atoms:
                raise ConfigError("symbol.matrices", f"expected {space.n_atoms} square matrices")
            return SymbolFunction.table(space, arr, tail)
        if kind == "expr":
            rows = _get(d, "matrix", "symbol")
            if isinstance(rows, str):
                rows = [[rows]]
            if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
                raise ConfigError("symbol.matrix", "expected a matrix of expression strings")
            entries = []
            for i, row in enumerate(rows):
                out = []
                for j, e in enumerate(row):
                    key = f"symbol.matrix[{i}][{j}]"
                    try:
                        out.append(parse(e) if isinstance(e, str) else Num(_scalar(e, key)))
                    except ParseError as exc:
                        raise ConfigError(key, str(exc)) from None
                entries.append(out)
            return SymbolFunction.expr(space, entries, tail)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("symbol", str(exc)) from None
    raise ConfigError("symbol.kind", f"expected 'constant', 'table' or 'expr', got {kind!r}")


def parse_norm(d) -> NormSpec:
    if d is None:
        return NormSpec.lp(2)
    kind = _get(d, "type", "norm")
    try:
        if kind == "lp":
            return NormSpec.lp(_real(_get(d, "p", "norm"), "norm.p", allow_inf=True))
        if kind == "orlicz":
            phi = _get(d, "phi", "norm")
            return NormSpec.orlicz(phi, _real(_get(d, "p", "norm", False, 2.0), "norm.p"))
        if kind == "lorentz":
            return NormSpec.lorentz(_real(_get(d, "p", "norm"), "norm.p"),
                                    _real(_get(d, "q", "norm"), "norm.q", allow_inf=True))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("norm", str(exc)) from None
    raise ConfigError("norm.type", f"expected 'lp', 'orlicz' or 'lorentz', got {kind!r}")


def parse_task(d) -> Task:
    t = Task()
    if d is None:
        return t
    if not isinstance(d, dict):
        raise ConfigError("task", "expected an object")
    if "t_grid" in d:
        g = d["t_grid"]
        if not isinstance(g, list) or not g:
            raise ConfigError("task.t_grid", "expected a non-empty list")
        t.t_grid = [_real(x, f"task.t_grid[{i}]") for i, x in enumerate(g)]
        if t.t_grid[0] != 0:
            raise ConfigError("task.t_grid", "must start at 0")
        if any(b <= a for a, b in zip(t.t_grid, t.t_grid[1:])):
            raise ConfigError("task.t_grid", "must be strictly ascending")
    t.initial = d.get("initial")
    if "lambda" in d:
        t.lam = _scalar(d["lambda"], "task.lambda")
    if "m" in d:
        t.m = _int(d["m"], "task.m")
        if t.m < 0:
            raise ConfigError("task.m", "must be >= 0")
    if "tol" in d:
        t.tol = _real(d["tol"], "task.tol")
        if not t.tol > 0:
            raise ConfigError("task.tol", "must be positive")
    if "trials" in d:
        t.trials = _int(d["trials"], "task.trials")
        if t.trials < 1:
            raise ConfigError("task.trials", "must be >= 1")
    return t


def parse_config(d) -> ProblemConfig:
    if not isinstance(d, dict):
        raise ConfigError("<root>", "expected a JSON object")
    version = d.get("version")
    if version != SCHEMA_VERSION:
        raise ConfigError("version", f"expected {SCHEMA_VERSION}, got {version!r}")
    space = parse_space(_get(d, "space", ""))
    symbol = parse_symbol(_get(d, "symbol", ""), space)
    return ProblemConfig(space, symbol, parse_norm(d.get("norm")), parse_task(d.get("task")))


def load_config(path: str) -> ProblemConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError("--config", str(exc)) from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<json>", f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_config(raw)
