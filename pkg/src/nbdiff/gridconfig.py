"""Flat ``key = value`` grid configuration files.

List-valued axes are comma separated; an item ``start:stop:step`` expands to
an inclusive arithmetic range. ``#`` starts a comment. Example::

    mu_x = 5
    theta_x = 0.025
    n_x = 10:200:10, 250, 500, 1000
    trials = 2000
"""

from __future__ import annotations

from pathlib import Path

from .inference import MethodKind
from .simulation import ExperimentGrid

AXIS_KEYS = ("mu_x", "mu_y", "theta_x", "theta_y", "n_x", "n_y")
SCALAR_KEYS = {"trials": int, "alpha": float, "seed": int, "mixture_weight": float, "c_a": float, "c_b": float}
INT_AXES = ("n_x", "n_y")


class ConfigError(ValueError):
    pass


def _expand(token: str, kind):
    if ":" not in token:
        return [kind(token)]
    parts = token.split(":")
    if len(parts) != 3:
        raise ConfigError(f"range must be start:stop:step, got {token!r}")
    start, stop, step = (kind(p) for p in parts)
    if step <= 0 or stop < start:
        raise ConfigError(f"bad range {token!r}")
    out, k = [], 0
    while True:
        v = start + k * step
        if v > stop + (1e-9 * abs(step) if kind is float else 0):
            break
        out.append(v)
        k += 1
    return out


def parse_axis(text: str, kind=float) -> list:
    values = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            values.extend(_expand(token, kind))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"cannot parse {token!r} as {kind.__name__}") from None
    if not values:
        raise ConfigError("empty axis")
    return values


def parse_config(text: str) -> ExperimentGrid:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value

    unknown = set(raw) - set(AXIS_KEYS) - set(SCALAR_KEYS) - {"methods"}
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    missing = [k for k in AXIS_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"missing axes: {missing}")

    kwargs = {k: parse_axis(raw[k], int if k in INT_AXES else float) for k in AXIS_KEYS}
    for key, kind in SCALAR_KEYS.items():
        if key in raw:
            try:
                kwargs[key] = kind(raw[key])
            except ValueError:
                raise ConfigError(f"{key}: cannot parse {raw[key]!r}") from None
    if "methods" in raw:
        try:
            kwargs["methods"] = tuple(MethodKind.parse(m) for m in raw["methods"].split(",") if m.strip())
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    grid = ExperimentGrid(**kwargs)
    try:
        grid.specs()[0]  # validates shared settings once
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return grid


def load_config(path) -> ExperimentGrid:
    return parse_config(Path(path).read_text())


def bundled_config(name: str) -> Path:
    """Path of a configuration shipped with the package (e.g. ``figure1.cfg``)."""
    path = Path(__file__).parent / "configs" / name
    if not path.exists():
        raise FileNotFoundError(name)
    return path
