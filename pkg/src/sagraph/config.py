"""Fit configuration: defaults, TOML loading and a stable hash.

Example file::

    seed = 7

    [sampler]
    iterations = 2000
    burn_in = 1000
    mh_step = 0.1

    [prior]
    kind = "normal-gamma"     # or "normal"
    kappa = 0.1

    [restriction]
    kind = "triangular"       # "symmetric", "triangular" or "known-mask"
    orientation = "upper"
    tau = 0.001
    known_effects = "known.csv"   # k,i,j,mean,sd records for known-mask

    [selection]
    level = 0.5
"""

from __future__ import annotations

import csv
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .exceptions import ConfigurationError
from .params import KnownMask, Symmetric, Triangular
from .spatial_mh import MhConfig, NormalGammaPrior, NormalPrior

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["FitConfig", "load_config", "read_known_effects", "config_hash"]

_SECTIONS = {
    "sampler": ("iterations", "burn_in", "mh_step", "max_redraws", "greedy_accept", "init_eps",
                "refresh_every"),
    "prior": ("kind", "mu", "sigma", "kappa", "b0", "b1"),
    "restriction": ("kind", "orientation", "tau", "mu_diag", "known_effects"),
    "selection": ("level",),
}
MODEL_KEYS = ("prior", "mu", "sigma", "kappa", "b0", "b1", "restriction", "orientation", "tau",
              "mu_diag", "known_effects")
_RENAME = {("prior", "kind"): "prior", ("restriction", "kind"): "restriction"}


@dataclass(frozen=True)
class FitConfig:
    """Every sampler, prior and restriction setting of one fit."""

    iterations: int = 2000
    burn_in: int = 1000
    mh_step: float = 0.1
    max_redraws: int = 100
    greedy_accept: bool = False
    init_eps: float = 1e-4
    refresh_every: int = 500
    prior: str = "normal"
    mu: float = 0.0
    sigma: float = 1.0
    kappa: float = 0.1
    b0: float = 0.01
    b1: float = 0.01
    restriction: str = "symmetric"
    orientation: str = "upper"
    tau: float = 0.001
    mu_diag: float = 0.0
    known_effects: tuple = field(default=())
    level: float = 0.5

    def __post_init__(self):
        if self.prior not in ("normal", "normal-gamma"):
            raise ConfigurationError(f"prior must be 'normal' or 'normal-gamma', got {self.prior!r}")
        if self.restriction not in ("symmetric", "triangular", "known-mask"):
            raise ConfigurationError(f"unknown restriction {self.restriction!r}")
        if not (0 <= self.burn_in < self.iterations):
            raise ConfigurationError("need 0 <= burn_in < iterations")
        if not (0 < self.level < 1):
            raise ConfigurationError("credible level must lie in (0, 1)")
        if self.restriction == "known-mask" and not self.known_effects:
            raise ConfigurationError("known-mask restriction needs known_effects records")
        object.__setattr__(self, "known_effects",
                           tuple(tuple(float(v) for v in rec) for rec in self.known_effects))

    @property
    def is_normal_gamma(self) -> bool:
        return self.prior == "normal-gamma"

    def mh_config(self) -> MhConfig:
        prior = NormalGammaPrior(self.kappa, self.b0, self.b1) if self.is_normal_gamma \
            else NormalPrior(self.mu, self.sigma)
        return MhConfig(self.mh_step, prior, self.max_redraws, self.greedy_accept)

    def build_restriction(self, p: int):
        if self.restriction == "symmetric":
            return Symmetric()
        if self.restriction == "triangular":
            return Triangular(self.orientation)
        return KnownMask.from_records(p, self.known_effects)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["known_effects"] = [list(r) for r in self.known_effects]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FitConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def updated(self, **changes) -> "FitConfig":
        return replace(self, **changes)

    def hash(self) -> str:
        return config_hash(self.to_dict())

    def model_hash(self) -> str:
        """Hash of the prior and restriction settings only; a simulation and a
        fit of the same model share it even when sampler tuning differs."""
        d = self.to_dict()
        return config_hash({k: d[k] for k in MODEL_KEYS})


def config_hash(d: dict) -> str:
    blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def read_known_effects(path: str | Path) -> tuple:
    """``k,i,j,mean,sd`` records (1-based indices, header optional)."""
    path = Path(path)
    out = []
    with path.open(newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            if row[0].strip() == "k":
                continue
            if len(row) != 5:
                raise ConfigurationError(f"{path}: expected k,i,j,mean,sd, got {row}")
            try:
                out.append((int(row[0]), int(row[1]), int(row[2]), float(row[3]), float(row[4])))
            except ValueError as exc:
                raise ConfigurationError(f"{path}: bad record {row}") from exc
    return tuple(out)


def load_config(path: str | Path | None) -> tuple[FitConfig, int | None]:
    """Read a TOML config; returns the config and the seed it names (if any)."""
    if path is None:
        return FitConfig(), None
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text())
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    seed = raw.pop("seed", None)
    flat = {}
    for section, body in raw.items():
        if section not in _SECTIONS or not isinstance(body, dict):
            raise ConfigurationError(f"{path}: unknown section [{section}]")
        for key, value in body.items():
            if key not in _SECTIONS[section]:
                raise ConfigurationError(f"{path}: unknown key {section}.{key}")
            flat[_RENAME.get((section, key), key)] = value
    known = flat.pop("known_effects", None)
    if known is not None:
        flat["known_effects"] = read_known_effects(path.parent / known)
    return FitConfig.from_dict(flat), (int(seed) if seed is not None else None)
