"""Channel-spec JSON files.

Example::

    {
      "input_alphabet": ["0", "1"],
      "input_distribution": [0.5, 0.5],
      "main_channel": {"output_alphabet": ["0", "1"], "matrix": [[0.95, 0.05], [0.05, 0.95]]},
      "wiretap_channel": {"output_alphabet": ["0", "1"], "matrix": [[0.9, 0.1], [0.1, 0.9]]},
      "prefix": {"aux_alphabet": ["a", "b"], "aux_distribution": [0.5, 0.5],
                 "matrix": [[1, 0], [0, 1]]},
      "rates": [{"R": 0.1, "R_prime": 0.45}]
    }

``prefix`` and ``rates`` are optional. Rows must sum to one within 1e-9 and
are then renormalized.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .prob_core import Channel, Distribution, ProbabilityError, WiretapInstance, compose_prefix

PARSE_TOL = 1e-9


class SpecError(ValueError):
    """A spec file failed to parse or validate; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _locate(text: str, path: tuple) -> int | None:
    """Best-effort 1-based line of the JSON value at ``path`` (keys and list indices)."""
    pos = 0
    for step in path:
        if isinstance(step, str):
            k = text.find(f'"{step}"', pos)
            if k < 0:
                return None
            pos = k + len(step) + 2
            continue
        start = text.find("[", pos)
        if start < 0:
            return None
        depth, idx, expecting = 0, 0, True
        for i in range(start + 1, len(text)):
            ch = text[i]
            if depth == 0:
                if ch == "]":
                    return None
                if ch == ",":
                    idx, expecting = idx + 1, True
                elif expecting and not ch.isspace():
                    if idx == step:
                        pos = i
                        break
                    expecting = False
            if ch in "[{":
                depth += 1
            elif ch in "]}":
                depth -= 1
        else:
            return None
    return text.count("\n", 0, pos) + 1


def _norm_vector(values, what: str, text: str, path: tuple) -> np.ndarray:
    line = _locate(text, path)
    try:
        v = np.array(values, dtype=float)
    except (TypeError, ValueError):
        raise SpecError(f"{what} must be a list of numbers", line) from None
    if v.ndim != 1 or v.size == 0 or not np.all(np.isfinite(v)):
        raise SpecError(f"{what} must be a non-empty list of finite numbers", line)
    if np.any(v < 0):
        raise SpecError(f"{what} has a negative entry", line)
    s = v.sum()
    if abs(s - 1.0) > PARSE_TOL:
        raise SpecError(f"{what} sums to {s:.12g}, not 1", line)
    if abs(s - 1.0) > 1e-12:
        v = v / s
    return v


def _norm_matrix(rows, what: str, n_rows: int, n_cols: int, text: str, path: tuple) -> np.ndarray:
    line = _locate(text, path)
    if not isinstance(rows, list) or len(rows) != n_rows:
        raise SpecError(f"{what} must have {n_rows} rows", line)
    out = []
    for i, row in enumerate(rows):
        v = _norm_vector(row, f"{what} row {i}", text, path + (i,))
        if v.size != n_cols:
            raise SpecError(f"{what} row {i} has {v.size} entries, expected {n_cols}", _locate(text, path + (i,)))
        out.append(v)
    return np.vstack(out)


@dataclass(frozen=True)
class ChannelSpec:
    input_alphabet: tuple[str, ...]
    input_distribution: np.ndarray
    main_outputs: tuple[str, ...]
    main_matrix: np.ndarray
    wiretap_outputs: tuple[str, ...]
    wiretap_matrix: np.ndarray
    prefix_alphabet: tuple[str, ...] | None = None
    prefix_distribution: np.ndarray | None = None
    prefix_matrix: np.ndarray | None = None
    rates: tuple[tuple[float, float], ...] = ()
    source_hash: str = field(default="", compare=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChannelSpec):
            return NotImplemented
        return json.dumps(self.to_dict(), sort_keys=True) == json.dumps(other.to_dict(), sort_keys=True)

    def to_dict(self) -> dict:
        d = {
            "input_alphabet": list(self.input_alphabet),
            "input_distribution": self.input_distribution.tolist(),
            "main_channel": {"output_alphabet": list(self.main_outputs), "matrix": self.main_matrix.tolist()},
            "wiretap_channel": {"output_alphabet": list(self.wiretap_outputs), "matrix": self.wiretap_matrix.tolist()},
        }
        if self.prefix_matrix is not None:
            d["prefix"] = {
                "aux_alphabet": list(self.prefix_alphabet),
                "aux_distribution": self.prefix_distribution.tolist(),
                "matrix": self.prefix_matrix.tolist(),
            }
        if self.rates:
            d["rates"] = [{"R": r, "R_prime": rp} for r, rp in self.rates]
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def instance(self, rate: float = 0.0, rate_prime: float = 0.0) -> WiretapInstance:
        """The wire-tap instance, with the prefix folded in when present."""
        try:
            p_x = Distribution(self.input_distribution)
            v = Channel(self.main_matrix)
            w = Channel(self.wiretap_matrix)
            if self.prefix_matrix is not None:
                p_v = Distribution(self.prefix_distribution)
                prefix = Channel(self.prefix_matrix)
                # V becomes the input symbol; the induced law of X is not needed.
                _, v = compose_prefix(p_v, prefix, v)
                _, w = compose_prefix(p_v, prefix, w)
                p_x = p_v
            return WiretapInstance(p_x, v, w, rate, rate_prime)
        except ProbabilityError as exc:
            raise SpecError(str(exc)) from None


def _labels(value, what: str, text: str, path: tuple) -> tuple[str, ...]:
    if not isinstance(value, list) or not value or not all(isinstance(s, str) for s in value):
        raise SpecError(f"{what} must be a non-empty list of strings", _locate(text, path))
    if len(set(value)) != len(value):
        raise SpecError(f"{what} has duplicate symbols", _locate(text, path))
    return tuple(value)


def loads(text: str) -> ChannelSpec:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(raw, dict):
        raise SpecError("top level must be an object", 1)
    for key in ("input_alphabet", "input_distribution", "main_channel", "wiretap_channel"):
        if key not in raw:
            raise SpecError(f"missing field '{key}'")
    xs = _labels(raw["input_alphabet"], "input_alphabet", text, ("input_alphabet",))
    px = _norm_vector(raw["input_distribution"], "input_distribution", text, ("input_distribution",))
    if px.size != len(xs):
        raise SpecError("input_distribution length differs from input_alphabet", _locate(text, ("input_distribution",)))

    def channel(key: str):
        ch = raw[key]
        if not isinstance(ch, dict) or "matrix" not in ch or "output_alphabet" not in ch:
            raise SpecError(f"{key} needs 'output_alphabet' and 'matrix'", _locate(text, (key,)))
        outs = _labels(ch["output_alphabet"], f"{key}.output_alphabet", text, (key, "output_alphabet"))
        return outs, _norm_matrix(ch["matrix"], f"{key}.matrix", len(xs), len(outs), text, (key, "matrix"))

    v_out, v_mat = channel("main_channel")
    w_out, w_mat = channel("wiretap_channel")

    pa = pd = pm = None
    if raw.get("prefix") is not None:
        pre = raw["prefix"]
        if not isinstance(pre, dict):
            raise SpecError("prefix must be an object", _locate(text, ("prefix",)))
        pa = _labels(pre.get("aux_alphabet"), "prefix.aux_alphabet", text, ("prefix", "aux_alphabet"))
        pd = _norm_vector(pre.get("aux_distribution"), "prefix.aux_distribution", text, ("prefix", "aux_distribution"))
        if pd.size != len(pa):
            raise SpecError("prefix.aux_distribution length differs from aux_alphabet", _locate(text, ("prefix",)))
        pm = _norm_matrix(pre.get("matrix"), "prefix.matrix", len(pa), len(xs), text, ("prefix", "matrix"))

    rates = []
    for i, item in enumerate(raw.get("rates") or []):
        try:
            r, rp = float(item["R"]), float(item["R_prime"])
        except (KeyError, TypeError, ValueError):
            raise SpecError(f"rates[{i}] needs numeric 'R' and 'R_prime'", _locate(text, ("rates",))) from None
        if r < 0 or rp < 0 or not (math.isfinite(r) and math.isfinite(rp)):
            raise SpecError(f"rates[{i}] must be finite and non-negative", _locate(text, ("rates",)))
        rates.append((r, rp))

    spec = ChannelSpec(xs, px, v_out, v_mat, w_out, w_mat, pa, pd, pm, tuple(rates),
                       hashlib.sha256(text.encode("utf-8")).hexdigest()[:16])
    spec.instance()  # support checks
    return spec


def load(path) -> ChannelSpec:
    return loads(Path(path).read_text(encoding="utf-8"))
