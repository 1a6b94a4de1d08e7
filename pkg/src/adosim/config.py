"""Declarative experiment configs.

A config is a plain-text file of `key = value` lines (`#` starts a
comment). Four keys accept comma-separated lists and sweep into a crossed
condition grid: `policy`, `utility`, `prior`, and `population`. Everything
else is a scalar. Unknown keys are rejected with the offending line
number; all defaults are resolved at parse time so the canonical re-echo
of a config is complete.

Distribution specs
------------------
- ``uniform``                      uniform over the model's parameter grid
- ``normal(mu,sigma)``             density at grid points, renormalized
- ``beta(a1,b1)xbeta(a2,b2)``      product prior over an (a, b) grid
- ``point(v)`` / ``point(va,vb)``  degenerate at the nearest grid atom
- ``id1:spec / id2:spec``          per-model specs for multi-model sets

A bare spec on a multi-model set applies to every model.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .belief import FocusKind, JointBelief
from .dist import DiscreteDist, discretize_normal, normalize, point_mass, uniform
from .models import ResponseModel, make_model, retention_prior
from .utility import UtilityKind


class ConfigError(ValueError):
    """A config file violates the schema or its semantic constraints."""


_KNOWN_KEYS = (
    "model", "prior", "population", "policy", "utility", "focus",
    "trials", "reps", "seed",
    "prior_label", "population_label",
    "model_probs", "population_model_probs",
    "theta_grid", "delay_max", "ab_cells", "mu_grid", "y_bins",
    "fixed_schedule", "stratify_models", "ucb_weight", "metric",
)

_SWEEP_KEYS = ("policy", "utility", "prior", "population")

_POLICIES = ("ado", "fixed", "random")
_MODEL_IDS = ("irt", "pow", "exp", "gauss-a", "gauss-b")


def split_top_level(text: str, sep: str = ",") -> list[str]:
    """Split on `sep` outside parentheses, trimming whitespace."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur).strip())
    return [p for p in parts if p != ""]


@dataclass(frozen=True)
class GridSpec:
    """An inclusive `lo:hi:n` range of equally spaced points."""

    lo: float
    hi: float
    n: int

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        m = re.fullmatch(r"\s*(-?[\d.]+)\s*:\s*(-?[\d.]+)\s*:\s*(\d+)\s*", text)
        if not m:
            raise ConfigError(f"bad grid spec {text!r}, expected lo:hi:n")
        lo, hi, n = float(m.group(1)), float(m.group(2)), int(m.group(3))
        if n < 1 or hi < lo or (n > 1 and hi == lo):
            raise ConfigError(f"bad grid spec {text!r}")
        return cls(lo, hi, n)

    def points(self) -> tuple:
        return tuple(float(v) for v in np.linspace(self.lo, self.hi, self.n))

    def __str__(self):
        return f"{self.lo:g}:{self.hi:g}:{self.n}"


@dataclass(frozen=True)
class Condition:
    """One cell of the crossed sweep."""

    policy: str
    utility: UtilityKind
    prior_id: str
    prior_text: str
    population_id: str
    population_text: str

    @property
    def condition_id(self) -> str:
        return "|".join([self.policy, self.utility.value,
                         f"prior={self.prior_id}", f"pop={self.population_id}"])


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved experiment description (one file, many cells)."""

    model_ids: tuple
    focus: FocusKind
    policies: tuple
    utilities: tuple
    priors: tuple            # (label, spec text) pairs
    populations: tuple       # (label, spec text) pairs
    trials: int
    reps: int
    seed: int
    model_probs: tuple | None
    population_model_probs: tuple | None
    theta_grid: GridSpec
    delay_max: int
    ab_cells: int
    mu_grid: GridSpec
    y_bins: GridSpec
    fixed_schedule: tuple    # ("grid", 1) or (values tuple, repeat)
    stratify_models: bool
    ucb_weight: float
    metric: tuple

    def conditions(self) -> tuple:
        cells = []
        for policy in self.policies:
            for utility in self.utilities:
                for prior_id, prior_text in self.priors:
                    for pop_id, pop_text in self.populations:
                        cells.append(Condition(policy, utility, prior_id, prior_text,
                                               pop_id, pop_text))
        return tuple(cells)


def _parse_lines(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key, value = key.strip(), value.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        values[key] = value
    return values


def _parse_int(values, key, minimum=None):
    try:
        v = int(values[key])
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {values[key]!r}") from None
    if minimum is not None and v < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {v}")
    return v


def _parse_probs(text, n, key):
    try:
        probs = tuple(float(p) for p in split_top_level(text))
    except ValueError:
        raise ConfigError(f"{key} must be a comma list of probabilities") from None
    if len(probs) != n:
        raise ConfigError(f"{key} needs {n} entries, got {len(probs)}")
    if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-9:
        raise ConfigError(f"{key} must be non-negative and sum to 1")
    total = sum(probs)
    return tuple(p / total for p in probs)


def _labelled(specs, labels_text, key):
    if labels_text is None:
        return tuple((s, s) for s in specs)
    labels = split_top_level(labels_text)
    if len(labels) != len(specs):
        raise ConfigError(f"{key} needs one label per spec, "
                          f"got {len(labels)} for {len(specs)}")
    return tuple(zip(labels, specs))


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a config file into an `ExperimentConfig`."""
    values = _parse_lines(text)
    for key in ("model", "prior", "population", "trials", "reps", "seed"):
        if key not in values:
            raise ConfigError(f"missing required key {key!r}")

    model_ids = tuple(split_top_level(values["model"]))
    for mid in model_ids:
        if mid not in _MODEL_IDS:
            raise ConfigError(f"unknown model id {mid!r}")
    if len(set(model_ids)) != len(model_ids):
        raise ConfigError("duplicate model ids")

    focus_text = values.get("focus", "parameter" if len(model_ids) == 1 else "model")
    try:
        focus = FocusKind(focus_text)
    except ValueError:
        raise ConfigError(f"unknown focus {focus_text!r}") from None
    if focus is FocusKind.JOINT:
        raise ConfigError("the joint focus is internal to the total-entropy utility; "
                          "configure focus = parameter or model")
    if focus is FocusKind.PARAMETER and len(model_ids) > 1:
        raise ConfigError("parameter focus requires a single model")
    if focus is FocusKind.MODEL and len(model_ids) < 2:
        raise ConfigError("model focus requires at least two models")

    policies = tuple(split_top_level(values.get("policy", "ado")))
    for p in policies:
        if p not in _POLICIES:
            raise ConfigError(f"unknown policy {p!r}")

    default_utility = "mi-parameter" if focus is FocusKind.PARAMETER else "mi-model"
    utilities = []
    for u in split_top_level(values.get("utility", default_utility)):
        try:
            utilities.append(UtilityKind(u))
        except ValueError:
            raise ConfigError(f"unknown utility {u!r}") from None
    for u in utilities:
        if u is UtilityKind.MI_PARAMETER and len(model_ids) > 1:
            raise ConfigError("mi-parameter utility requires a single model")
        if u in (UtilityKind.MI_MODEL, UtilityKind.TOTAL_ENTROPY) and len(model_ids) < 2:
            raise ConfigError(f"{u.value} utility requires at least two models")

    priors = _labelled(split_top_level(values["prior"]),
                       values.get("prior_label"), "prior_label")
    populations = _labelled(split_top_level(values["population"]),
                            values.get("population_label"), "population_label")

    trials = _parse_int(values, "trials", minimum=1)
    reps = _parse_int(values, "reps", minimum=1)
    try:
        seed = int(values["seed"])
    except ValueError:
        raise ConfigError(f"seed must be an integer, got {values['seed']!r}") from None

    model_probs = (_parse_probs(values["model_probs"], len(model_ids), "model_probs")
                   if "model_probs" in values else None)
    pop_probs = (_parse_probs(values["population_model_probs"], len(model_ids),
                              "population_model_probs")
                 if "population_model_probs" in values else None)

    theta_grid = GridSpec.parse(values.get("theta_grid", "-3:3:31"))
    delay_max = _parse_int({**values, "delay_max": values.get("delay_max", "100")},
                           "delay_max", minimum=1)
    ab_cells = _parse_int({**values, "ab_cells": values.get("ab_cells", "50")},
                          "ab_cells", minimum=2)
    mu_grid = GridSpec.parse(values.get("mu_grid", "-20:20:41"))
    y_bins = GridSpec.parse(values.get("y_bins", "-40:40:81"))

    sched_text = values.get("fixed_schedule", "grid")
    if sched_text == "grid":
        fixed_schedule = ("grid", 1)
    else:
        m = re.fullmatch(r"(.+?)(?:\s*x\s*(\d+))?", sched_text)
        reps_per = int(m.group(2)) if m.group(2) else 1
        try:
            stim_values = tuple(float(v) for v in split_top_level(m.group(1)))
        except ValueError:
            raise ConfigError(f"bad fixed_schedule {sched_text!r}") from None
        if reps_per < 1 or not stim_values:
            raise ConfigError(f"bad fixed_schedule {sched_text!r}")
        fixed_schedule = (stim_values, reps_per)

    stratify_text = values.get("stratify_models", "off")
    if stratify_text not in ("on", "off"):
        raise ConfigError(f"stratify_models must be on or off, got {stratify_text!r}")
    stratify = stratify_text == "on"
    if stratify and len(model_ids) < 2:
        raise ConfigError("stratify_models needs a multi-model set")

    try:
        ucb_weight = float(values.get("ucb_weight", "1"))
    except ValueError:
        raise ConfigError("ucb_weight must be a number") from None

    metric = tuple(split_top_level(values.get("metric", "log,linear")))
    for m_ in metric:
        if m_ not in ("log", "linear"):
            raise ConfigError(f"unknown metric {m_!r}")

    cfg = ExperimentConfig(
        model_ids=model_ids, focus=focus, policies=policies,
        utilities=tuple(utilities), priors=priors, populations=populations,
        trials=trials, reps=reps, seed=seed,
        model_probs=model_probs, population_model_probs=pop_probs,
        theta_grid=theta_grid, delay_max=delay_max, ab_cells=ab_cells,
        mu_grid=mu_grid, y_bins=y_bins, fixed_schedule=fixed_schedule,
        stratify_models=stratify, ucb_weight=ucb_weight, metric=metric,
    )
    # fail fast on specs that cannot resolve onto the grids
    models = build_models(cfg)
    for _, spec_text in (*cfg.priors, *cfg.populations):
        resolve_param_dists(spec_text, models)
    _resolved_schedule(cfg, models)
    return cfg


def emit_config(cfg: ExperimentConfig) -> str:
    """Canonical text for a resolved config; parsing it round-trips."""
    lines = [
        f"model = {', '.join(cfg.model_ids)}",
        f"focus = {cfg.focus.value}",
        f"policy = {', '.join(cfg.policies)}",
        f"utility = {', '.join(u.value for u in cfg.utilities)}",
        f"prior = {', '.join(text for _, text in cfg.priors)}",
        f"prior_label = {', '.join(label for label, _ in cfg.priors)}",
        f"population = {', '.join(text for _, text in cfg.populations)}",
        f"population_label = {', '.join(label for label, _ in cfg.populations)}",
        f"trials = {cfg.trials}",
        f"reps = {cfg.reps}",
        f"seed = {cfg.seed}",
    ]
    if cfg.model_probs is not None:
        lines.append(f"model_probs = {', '.join(repr(p) for p in cfg.model_probs)}")
    if cfg.population_model_probs is not None:
        lines.append("population_model_probs = "
                     + ", ".join(repr(p) for p in cfg.population_model_probs))
    lines += [
        f"theta_grid = {cfg.theta_grid}",
        f"delay_max = {cfg.delay_max}",
        f"ab_cells = {cfg.ab_cells}",
        f"mu_grid = {cfg.mu_grid}",
        f"y_bins = {cfg.y_bins}",
    ]
    if cfg.fixed_schedule[0] == "grid":
        lines.append("fixed_schedule = grid")
    else:
        stim_values, reps_per = cfg.fixed_schedule
        lines.append("fixed_schedule = "
                     + ", ".join(f"{v:g}" for v in stim_values) + f" x{reps_per}")
    lines += [
        f"stratify_models = {'on' if cfg.stratify_models else 'off'}",
        f"ucb_weight = {cfg.ucb_weight:g}",
        f"metric = {', '.join(cfg.metric)}",
    ]
    return "\n".join(lines) + "\n"


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(emit_config(cfg).encode()).hexdigest()[:16]


def build_models(cfg: ExperimentConfig) -> tuple:
    """Instantiate the config's model set on its grids."""
    models = tuple(
        make_model(mid, grid=cfg.theta_grid.points(), delay_max=cfg.delay_max,
                   n_cells=cfg.ab_cells, mu_grid=cfg.mu_grid.points(),
                   y_bins=cfg.y_bins.points())
        for mid in cfg.model_ids
    )
    if len(models) > 1:
        spaces = {m.stimulus_space for m in models}
        if len(spaces) != 1:
            raise ConfigError("models in one experiment must share a stimulus space")
    return models


def _nearest_atom(grid, target):
    if isinstance(grid[0], tuple):
        pts = np.asarray(grid)
        t = np.asarray(target, dtype=float)
        if t.shape != pts[0].shape:
            raise ConfigError(f"point spec needs {pts.shape[1]} coordinates")
        return grid[int(np.argmin(((pts - t) ** 2).sum(axis=1)))]
    pts = np.asarray(grid)
    return grid[int(np.argmin(np.abs(pts - float(target[0]))))]


def _resolve_one(spec_text: str, model: ResponseModel) -> DiscreteDist:
    text = spec_text.strip()
    if text == "uniform":
        return uniform(model.param_grid)
    m = re.fullmatch(r"normal\(\s*(-?[\d.]+)\s*,\s*(-?[\d.]+)\s*\)", text)
    if m:
        if isinstance(model.param_grid[0], tuple):
            raise ConfigError(f"normal(...) does not fit the 2-d grid of {model.id!r}")
        try:
            return discretize_normal(float(m.group(1)), float(m.group(2)),
                                     model.param_grid)
        except ValueError as e:
            raise ConfigError(str(e)) from None
    m = re.fullmatch(
        r"beta\(\s*([\d.]+)\s*,\s*([\d.]+)\s*\)\s*x\s*beta\(\s*([\d.]+)\s*,\s*([\d.]+)\s*\)",
        text)
    if m:
        if not isinstance(model.param_grid[0], tuple):
            raise ConfigError(f"beta(...)xbeta(...) needs the 2-d grid of a "
                              f"retention model, not {model.id!r}")
        try:
            return retention_prior(model,
                                   (float(m.group(1)), float(m.group(2))),
                                   (float(m.group(3)), float(m.group(4))))
        except ValueError as e:
            raise ConfigError(str(e)) from None
    m = re.fullmatch(r"point\(\s*(-?[\d.]+)(?:\s*,\s*(-?[\d.]+))?\s*\)", text)
    if m:
        coords = [float(m.group(1))]
        if m.group(2) is not None:
            coords.append(float(m.group(2)))
        return point_mass(model.param_grid, _nearest_atom(model.param_grid, coords))
    raise ConfigError(f"cannot parse distribution spec {spec_text!r}")


def resolve_param_dists(spec_text: str, models) -> dict:
    """Map a distribution spec onto every model's parameter grid."""
    by_model = {m.id: m for m in models}
    parts = split_top_level(spec_text, sep="/")
    if len(parts) == 1 and ":" not in parts[0].split("(")[0]:
        return {m.id: _resolve_one(parts[0], m) for m in models}
    dists = {}
    for part in parts:
        if ":" not in part:
            raise ConfigError(f"expected 'model:spec' in {spec_text!r}")
        mid, sub = part.split(":", 1)
        mid = mid.strip()
        if mid not in by_model:
            raise ConfigError(f"spec names unknown model {mid!r}")
        if mid in dists:
            raise ConfigError(f"duplicate spec for model {mid!r}")
        dists[mid] = _resolve_one(sub, by_model[mid])
    missing = set(by_model) - set(dists)
    if missing:
        raise ConfigError(f"no spec for models {sorted(missing)}")
    return dists


def build_belief(spec_text: str, models, model_probs=None, role="specified") -> JointBelief:
    dists = resolve_param_dists(spec_text, models)
    probs = None
    if model_probs is not None:
        probs = DiscreteDist(tuple(m.id for m in models), np.asarray(model_probs))
    return JointBelief(models, dists, probs, role=role)


def _resolved_schedule(cfg: ExperimentConfig, models) -> tuple:
    """The fixed-design stimulus multiset, canonicalized to space atoms."""
    space = models[0].stimulus_space
    if cfg.fixed_schedule[0] == "grid":
        base = space
    else:
        stim_values, reps_per = cfg.fixed_schedule
        base = []
        for v in stim_values:
            try:
                base.append(space[models[0].stimulus_index(v)])
            except KeyError:
                raise ConfigError(f"schedule stimulus {v:g} is outside "
                                  "the stimulus space") from None
        base = tuple(base) * reps_per
    if "fixed" in cfg.policies and len(base) < cfg.trials:
        raise ConfigError(f"fixed schedule covers {len(base)} trials, "
                          f"config asks for {cfg.trials}")
    return base
