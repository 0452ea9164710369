"""Experiment configuration: a flat ``key = value`` text format.

Lines starting with ``#`` are comments.  Recognized keys::

    n            spatial dimension (1 or 2)
    N            samples per axis for the identity and conjecture suites
    L            box side for those suites
    k            algebra dimension, or a comma list such as ``1,2``
    theta        deformation scale(s), comma list; J = theta times the symplectic block
    J            explicit skew matrix, rows separated by ';' (overrides theta)
    mollifier_N  samples per axis for the mollifier suite
    mollifier_L  box side for the mollifier suite
    m_list       comma list of mollifier indices ('auto' sweeps the resolved range)
    seed         ensemble seed
    trials       random samples per check (default: a per-check count, see TRIALS)
    floor        calibrated lower bound for commutant residuals of non-members
    tol          verify_conjecture tolerance
    out          output directory

Unknown keys and malformed values raise :class:`ConfigError`.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from .grid import SkewForm


class ConfigError(ValueError):
    """Invalid configuration (reported as a usage error)."""


# random samples per check when ``trials`` is not set
TRIALS = dict(
    plancherel=50, weyl=20, homomorphism=30, undeformed=50,
    l2_bound=100, commutation=50, left_inverse=30, positive=20,
)

DEFAULTS_1D = dict(N=128, L=8 * np.pi, mollifier_N=512, mollifier_L=128 * np.pi)
DEFAULTS_2D = dict(N=32, L=8 * np.pi, mollifier_N=128, mollifier_L=128 * np.pi)


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 1
    N: int = 128
    L: float = 8 * np.pi
    ks: tuple = (1, 2)
    thetas: tuple = (0.0, 0.5, 2.0)
    J: tuple = None
    mollifier_N: int = 512
    mollifier_L: float = 128 * np.pi
    m_list: tuple = None
    seed: int = 0
    trials: int = None
    floor: float = 0.1
    tol: float = 1e-8
    out: str = "results"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ConfigError(f"n must be 1 or 2, got {self.n}")
        for key in ("N", "mollifier_N"):
            v = getattr(self, key)
            if v < 2 or v & (v - 1):
                raise ConfigError(f"{key} must be a power of two, got {v}")
        if not (self.L > 0 and self.mollifier_L > 0):
            raise ConfigError("box lengths must be positive")
        if self.trials is not None and self.trials < 1:
            raise ConfigError("trials must be positive")
        if any(k < 1 for k in self.ks):
            raise ConfigError("k must be positive")
        if self.J is not None:
            M = np.array(self.J, dtype=float)
            if M.shape != (self.n, self.n):
                raise ConfigError(f"J must be {self.n}x{self.n}")
            if not np.array_equal(M.T, -M):
                raise ConfigError("J is not skew-symmetric")

    def skew_forms(self):
        """(label, SkewForm) for every deformation in the sweep."""
        if self.J is not None:
            return [("explicit", SkewForm(np.array(self.J, dtype=float)))]
        return [(f"theta={t:g}", SkewForm.from_theta(self.n, t)) for t in self.thetas]

    def trials_for(self, check):
        return TRIALS[check] if self.trials is None else self.trials

    def with_overrides(self, **kw):
        return replace(self, **kw)


def _floats(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def _ints(text):
    return tuple(int(t) for t in text.split(",") if t.strip())


def _matrix(text):
    return tuple(tuple(float(v) for v in row.replace(",", " ").split()) for row in text.split(";"))


PARSERS = {
    "n": int, "N": int, "L": float, "k": _ints, "theta": _floats, "J": _matrix,
    "mollifier_N": int, "mollifier_L": float, "m_list": str, "seed": int,
    "trials": int, "floor": float, "tol": float, "out": str,
}
FIELD = {"k": "ks", "theta": "thetas"}


def parse_config(text):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = PARSERS[key](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from exc
    return build_config(values)


def build_config(values):
    values = dict(values)
    n = values.get("n", 1)
    base = dict(DEFAULTS_1D if n == 1 else DEFAULTS_2D)
    if n == 1 and "theta" not in values:
        base["thetas"] = (0.0,)  # the only skew form in one dimension
    m_list = values.pop("m_list", None)
    if m_list is not None and m_list.strip() != "auto":
        try:
            base["m_list"] = _ints(m_list)
        except ValueError as exc:
            raise ConfigError(f"bad m_list {m_list!r}") from exc
    for key, val in values.items():
        base[FIELD.get(key, key)] = val
    try:
        return ExperimentConfig(**base)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)
