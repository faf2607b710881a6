"""Experiment configuration: TOML files mirroring :class:`ExperimentConfig`.

Each replication experiment ships as a committed config under
``mssa/configs/``; user configs follow the same schema.  Sections:

    [experiment]  name, seed, samples, out
    [model]       ar / ma / sigma / intercept (nested arrays)
    [filter]      length, delta, ht or rho or match_correlation, ell
    [target]      kind ("allpass" | "hp-two-sided" | "custom"), lam, horizon,
                  taps / first_lag for the custom kind
    [data]        optional CSV paths overriding bundled snapshots

Every field the solver eventually touches is validated here first, so a
bad config fails before any compute starts.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .errors import ValidationError
from .processes import VarmaModel

EXPERIMENTS = (
    "solve",
    "var1-forecast",
    "wh-smooth",
    "var3-smooth",
    "indpro-nowcast",
)


@dataclass
class ExperimentConfig:
    name: str
    seed: int = 0
    samples: int = 100_000
    out_dir: str = "out"
    length: int = 201
    delta: int = 0
    ht: list = field(default_factory=list)
    rho: list = field(default_factory=list)
    match_correlation: float | None = None
    ell: float = 1.0
    lam: float = 14400.0
    target_kind: str = "hp-two-sided"
    horizon: int = 0
    target_taps: list = field(default_factory=list)
    target_first_lag: int = 0
    model: VarmaModel | None = None
    data: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def require_model(self):
        if self.model is None:
            raise ValidationError("experiment %r needs a [model] section" % self.name)
        return self.model

    def constraint_mode(self):
        """Which constraint the config sets: 'ht', 'rho' or 'correlation'."""
        modes = [m for m, v in (("ht", self.ht), ("rho", self.rho),
                                ("correlation", self.match_correlation))
                 if v not in (None, [],)]
        if len(modes) > 1:
            raise ValidationError("config sets more than one of ht/rho/match_correlation")
        return modes[0] if modes else None


def _want(table, key, types, what, default=None, required=False):
    if key not in table:
        if required:
            raise ValidationError("missing %s key %r" % (what, key))
        return default
    val = table[key]
    if types and not isinstance(val, types):
        raise ValidationError("%s key %r has type %s, expected %s"
                              % (what, key, type(val).__name__, types))
    return val


def _coeff_list(table, key, n):
    """Nested-array AR/MA coefficients -> list of (n, n) arrays."""
    raw = table.get(key)
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise ValidationError("[model] %s must be an array of matrices" % key)
    mats = []
    for i, m in enumerate(raw):
        arr = np.asarray(m, dtype=float)
        if n == 1 and arr.ndim == 0:
            arr = arr.reshape(1, 1)
        if arr.shape != (n, n):
            raise ValidationError("[model] %s[%d] has shape %s, expected (%d, %d)"
                                  % (key, i, arr.shape, n, n))
        mats.append(arr)
    return mats


def parse_model(table):
    n = _want(table, "n", int, "[model]", required=True)
    if n < 1:
        raise ValidationError("[model] n must be at least 1")
    sigma = np.asarray(_want(table, "sigma", list, "[model]", required=True), dtype=float)
    if n == 1 and sigma.ndim <= 1:
        sigma = sigma.reshape(1, 1)
    ar = _coeff_list(table, "ar", n)
    ma = _coeff_list(table, "ma", n)
    intercept = table.get("intercept")
    model = VarmaModel(ar=ar, ma=ma, sigma=sigma,
                       intercept=np.zeros(n) if intercept is None
                       else np.asarray(intercept, dtype=float))
    model.validate_stationary()
    return model


def parse_config(doc, name_hint=None):
    """Build an :class:`ExperimentConfig` from a parsed TOML mapping."""
    if not isinstance(doc, dict):
        raise ValidationError("config root must be a table")
    exp = doc.get("experiment", {})
    name = _want(exp, "name", str, "[experiment]", default=name_hint)
    if name is None:
        raise ValidationError("config lacks [experiment] name")
    if name not in EXPERIMENTS:
        raise ValidationError("unknown experiment %r; valid: %s"
                              % (name, ", ".join(EXPERIMENTS)))
    filt = doc.get("filter", {})
    tgt = doc.get("target", {})
    length = _want(filt, "length", int, "[filter]", default=201)
    if length < 2:
        raise ValidationError("[filter] length must be at least 2")
    delta = _want(filt, "delta", int, "[filter]", default=0)
    ht = filt.get("ht", [])
    if isinstance(ht, (int, float)) and not isinstance(ht, bool):
        ht = [float(ht)]
    ht = [float(h) for h in ht]
    if any(h <= 1.0 for h in ht):
        raise ValidationError("[filter] ht entries must exceed 1")
    rho = filt.get("rho", [])
    if isinstance(rho, (int, float)) and not isinstance(rho, bool):
        rho = [float(rho)]
    rho = [float(r) for r in rho]
    if any(abs(r) >= 1.0 for r in rho):
        raise ValidationError("[filter] rho entries must lie in (-1, 1)")
    match_corr = filt.get("match_correlation")
    if match_corr is not None:
        match_corr = float(match_corr)
        if not 0.0 < abs(match_corr) < 1.0:
            raise ValidationError("[filter] match_correlation must lie in (0, 1)")
    lam = float(_want(tgt, "lam", (int, float), "[target]", default=14400.0))
    if lam <= 0:
        raise ValidationError("[target] lam must be positive")
    kind = _want(tgt, "kind", str, "[target]", default="hp-two-sided")
    if kind not in ("allpass", "hp-two-sided", "custom"):
        raise ValidationError("[target] kind %r not one of allpass, hp-two-sided, custom"
                              % kind)
    taps = tgt.get("taps", [])
    if kind == "custom":
        if not taps:
            raise ValidationError("[target] kind 'custom' needs a non-empty taps array")
        taps = [float(t) for t in taps]
    elif taps:
        raise ValidationError("[target] taps only apply to kind 'custom'")
    model = parse_model(doc["model"]) if "model" in doc else None
    cfg = ExperimentConfig(
        name=name,
        seed=int(_want(exp, "seed", int, "[experiment]", default=0)),
        samples=int(_want(exp, "samples", int, "[experiment]", default=100_000)),
        out_dir=str(_want(exp, "out", str, "[experiment]", default="out")),
        length=length,
        delta=delta,
        ht=ht,
        rho=rho,
        match_correlation=match_corr,
        ell=float(_want(filt, "ell", (int, float), "[filter]", default=1.0)),
        lam=lam,
        target_kind=kind,
        horizon=int(_want(tgt, "horizon", int, "[target]", default=0)),
        target_taps=taps,
        target_first_lag=int(_want(tgt, "first_lag", int, "[target]", default=0)),
        model=model,
        data=dict(doc.get("data", {})),
        raw=doc,
    )
    if cfg.samples < 2:
        raise ValidationError("[experiment] samples must be at least 2")
    if cfg.ell <= 0:
        raise ValidationError("[filter] ell must be positive")
    cfg.constraint_mode()
    return cfg


def load_config(path):
    """Parse a TOML config file into an :class:`ExperimentConfig`."""
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ValidationError("config file %r does not exist" % str(path))
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError("config %r is not valid TOML: %s" % (str(path), exc))
    return parse_config(doc)


def bundled_config(experiment):
    """Load the committed config for one of the shipped experiments."""
    fname = experiment.replace("-", "_") + ".toml"
    ref = resources.files("mssa") / "configs" / fname
    if not ref.is_file():
        raise ValidationError("no bundled config for experiment %r" % experiment)
    doc = tomllib.loads(ref.read_text())
    return parse_config(doc, name_hint=experiment)


def bundled_data_path(fname):
    """Path-like handle to a bundled data file under ``mssa/data/``."""
    ref = resources.files("mssa") / "data" / fname
    if not ref.is_file():
        raise ValidationError("no bundled data file %r" % fname)
    return ref
