"""Ground-truth sampling, trial loops, replication batches, and summaries.

A batch crosses the config's swept keys into conditions and runs `reps`
replications of each. Every replication owns a counter-based RNG stream
derived from (master seed, replication index), so results are identical
regardless of worker count or scheduling; streams are shared across
conditions, which pairs the sampled ground truths between, e.g., the
adaptive and fixed designs.

Each replication samples a ground-truth (model, grid point) from the
population belief, holds it fixed, and then repeatedly selects a stimulus,
draws a response from the true likelihood row, and updates the specified
belief. The population belief is never updated. Trial 0 in the emitted
records is the initialization row carrying the prior's metric value.
"""

from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass, field

import numpy as np

from .belief import FocusKind, JointBelief
from .config import Condition, ExperimentConfig, build_belief, build_models, \
    _resolved_schedule
from .policy import ado_select, make_fixed_schedule, random_select
from .utility import UtilityKind, utility_value

GENERATOR_NAME = "philox"

# fraction of floored metric records above which a batch is flagged
FLOOR_FLAG_FRACTION = 0.01


def replication_rng(master_seed: int, rep_index: int) -> np.random.Generator:
    """The independent counter-based stream for one replication."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(rep_index,))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class TrialRecord:
    """One trial's outcome under the specified belief.

    `log_p_true` and `p_true` are the post-update log and linear masses the
    specified belief assigns to the ground-truth focus value; `floored`
    marks records whose truth atom hit the underflow floor in the update.
    Trial 0 is the initialization record (no stimulus, response, or
    utility).
    """

    rep: int
    trial: int
    stimulus: object
    response: object
    utility: float | None
    log_p_true: float
    p_true: float
    floored: bool


@dataclass
class ReplicationResult:
    rep: int
    true_model: str
    true_param: object
    records: list
    snapshots: list | None = None


@dataclass
class ConditionRuntime:
    """A condition resolved onto model tables and initial beliefs."""

    condition: Condition
    focus: FocusKind
    models: tuple
    spec_belief: JointBelief
    pop_belief: JointBelief
    candidates: tuple
    schedule_base: tuple
    trials: int
    seed: int
    ucb_weight: float
    stratify: bool


def build_runtimes(cfg: ExperimentConfig) -> list:
    models = build_models(cfg)
    schedule_base = _resolved_schedule(cfg, models)
    runtimes = []
    for cond in cfg.conditions():
        spec = build_belief(cond.prior_text, models, cfg.model_probs,
                            role="specified")
        pop = build_belief(cond.population_text, models,
                           cfg.population_model_probs, role="population")
        runtimes.append(ConditionRuntime(
            condition=cond, focus=cfg.focus, models=models,
            spec_belief=spec, pop_belief=pop,
            candidates=models[0].stimulus_space, schedule_base=schedule_base,
            trials=cfg.trials, seed=cfg.seed, ucb_weight=cfg.ucb_weight,
            stratify=cfg.stratify_models))
    return runtimes


def sample_ground_truth(pop: JointBelief, rng: np.random.Generator,
                        forced_model: str | None = None):
    """Draw (model id, parameter grid point) from the population belief.

    With `forced_model` the model draw is skipped (stratified designs);
    the parameter is always sampled from that model's population grid
    distribution, so its specified prior mass is well defined.
    """
    model_id = forced_model if forced_model is not None else pop.model_probs.sample(rng)
    theta = pop.param_dists[model_id].sample(rng)
    return model_id, theta


def run_replication(rt: ConditionRuntime, rep_index: int,
                    log_beliefs: bool = False) -> ReplicationResult:
    rng = replication_rng(rt.seed, rep_index)
    forced = rt.models[rep_index % len(rt.models)].id if rt.stratify else None
    true_model, true_param = sample_ground_truth(rt.pop_belief, rng, forced)
    model_ids = [m.id for m in rt.models]
    tm = rt.spec_belief.model(true_model)
    theta_index = tm.param_index(true_param)
    truth_model_index = model_ids.index(true_model)

    policy = rt.condition.policy
    schedule = None
    if policy == "fixed":
        schedule = make_fixed_schedule(rt.schedule_base, rng)[:rt.trials]

    def metric(belief, info=None):
        if rt.focus is FocusKind.PARAMETER:
            p = float(belief.param_masses(true_model)[theta_index])
            floored = info.param_floored(true_model, theta_index) if info else False
        else:
            p = float(belief.model_probs.masses[truth_model_index])
            floored = info.model_floored(truth_model_index) if info else False
        log_p = math.log(p) if p > 0 else -math.inf
        return log_p, p, floored

    belief = rt.spec_belief
    log_p, p, _ = metric(belief)
    records = [TrialRecord(rep_index, 0, None, None, None, log_p, p, False)]
    snapshots = [belief.snapshot()] if log_beliefs else None

    for trial in range(1, rt.trials + 1):
        if policy == "ado":
            x, u = ado_select(belief, rt.candidates, rt.condition.utility,
                              rt.focus, rt.ucb_weight)
        else:
            x = schedule[trial - 1] if policy == "fixed" else random_select(rt.candidates, rng)
            u = utility_value(rt.condition.utility, belief, x, rt.focus, rt.ucb_weight)
        row = tm.lik[theta_index, tm.stimulus_index(x), :]
        yi = int(rng.choice(len(row), p=row))
        y = tm.response_space[yi]
        belief, info = belief.update_with_info(x, y)
        log_p, p, floored = metric(belief, info)
        records.append(TrialRecord(rep_index, trial, x, y, float(u), log_p, p, floored))
        if log_beliefs:
            snapshots.append(belief.snapshot())
    return ReplicationResult(rep_index, true_model, true_param, records, snapshots)


# -- batch execution ---------------------------------------------------------

_WORKER_RUNTIMES = None
_WORKER_LOG_BELIEFS = False


def _init_worker(cfg, log_beliefs):
    global _WORKER_RUNTIMES, _WORKER_LOG_BELIEFS
    _WORKER_RUNTIMES = build_runtimes(cfg)
    _WORKER_LOG_BELIEFS = log_beliefs


def _run_task(task):
    ci, rep = task
    return ci, rep, run_replication(_WORKER_RUNTIMES[ci], rep, _WORKER_LOG_BELIEFS)


def record_dict(cond: Condition, result: ReplicationResult, rec: TrialRecord,
                snapshot=None) -> dict:
    """The canonical, JSON-ready form of one trial record."""
    d = {
        "condition_id": cond.condition_id,
        "design": cond.policy,
        "utility_kind": cond.utility.value,
        "prior_id": cond.prior_id,
        "population_id": cond.population_id,
        "rep": rec.rep,
        "trial": rec.trial,
        "stimulus": rec.stimulus,
        "response": rec.response,
        "utility": rec.utility,
        "log_p_true": rec.log_p_true,
        "p_true": rec.p_true,
        "floored": rec.floored,
    }
    if rec.trial == 0:
        d["true_model"] = result.true_model
        d["true_param"] = result.true_param
    if snapshot is not None:
        d["belief"] = snapshot
    return d


@dataclass
class SummaryRow:
    condition_id: str
    design: str
    utility_kind: str
    prior_id: str
    population_id: str
    trial: int
    mean_log_p_true: float
    se_log: float
    mean_p_true: float
    se_linear: float
    n_reps: int


SUMMARY_COLUMNS = ("condition_id", "design", "utility_kind", "prior_id",
                   "population_id", "trial", "mean_log_p_true", "se_log",
                   "mean_p_true", "se_linear", "n_reps")


def _mean_se(values):
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return mean, se


def summarize_records(records) -> list:
    """Aggregate trial records into per-(condition, trial) summary rows.

    Values are ordered by replication index before reducing, so the result
    is independent of record arrival order. Conditions that differ only in
    population are additionally pooled into rows with population_id
    "pooled".
    """
    groups = {}
    order = []
    for r in records:
        key = (r["condition_id"], r["design"], r["utility_kind"],
               r["prior_id"], r["population_id"])
        if key not in groups:
            groups[key] = {}
            order.append(key)
        groups[key].setdefault(r["trial"], []).append(
            (r["rep"], r["log_p_true"], r["p_true"]))

    rows = []
    for key in order:
        cid, design, uk, prior_id, pop_id = key
        for trial in sorted(groups[key]):
            cell = sorted(groups[key][trial])
            mean_log, se_log = _mean_se([v[1] for v in cell])
            mean_lin, se_lin = _mean_se([v[2] for v in cell])
            rows.append(SummaryRow(cid, design, uk, prior_id, pop_id, trial,
                                   mean_log, se_log, mean_lin, se_lin, len(cell)))

    pooled_groups = {}
    pooled_order = []
    for key in order:
        _, design, uk, prior_id, pop_id = key
        pkey = (design, uk, prior_id)
        if pkey not in pooled_groups:
            pooled_groups[pkey] = []
            pooled_order.append(pkey)
        pooled_groups[pkey].append(key)
    for pkey in pooled_order:
        members = pooled_groups[pkey]
        if len(members) < 2:
            continue
        design, uk, prior_id = pkey
        cid = "|".join([design, uk, f"prior={prior_id}", "pop=pooled"])
        trials = sorted({t for m in members for t in groups[m]})
        for trial in trials:
            cell = sorted((m[4], v[0], v[1], v[2])
                          for m in members for v in groups[m].get(trial, []))
            mean_log, se_log = _mean_se([v[2] for v in cell])
            mean_lin, se_lin = _mean_se([v[3] for v in cell])
            rows.append(SummaryRow(cid, design, uk, prior_id, "pooled", trial,
                                   mean_log, se_log, mean_lin, se_lin, len(cell)))
    return rows


@dataclass
class BatchResult:
    config: ExperimentConfig
    conditions: tuple
    records: list          # record dicts in canonical order
    summary: list          # SummaryRow values
    floor_by_condition: dict
    floor_total: int
    n_trial_records: int
    flagged: bool


def run_batch(cfg: ExperimentConfig, workers: int = 1,
              log_beliefs: bool = False) -> BatchResult:
    """Run every (condition, replication) cell and aggregate."""
    conditions = cfg.conditions()
    tasks = [(ci, rep) for ci in range(len(conditions)) for rep in range(cfg.reps)]
    if workers > 1:
        with multiprocessing.Pool(processes=workers, initializer=_init_worker,
                                  initargs=(cfg, log_beliefs)) as pool:
            outcomes = pool.map(_run_task, tasks)
    else:
        _init_worker(cfg, log_beliefs)
        outcomes = [_run_task(t) for t in tasks]
    outcomes.sort(key=lambda o: (o[0], o[1]))

    records = []
    floor_by_condition = {c.condition_id: 0 for c in conditions}
    n_trial_records = 0
    for ci, _, result in outcomes:
        cond = conditions[ci]
        for i, rec in enumerate(result.records):
            snap = result.snapshots[i] if result.snapshots is not None else None
            records.append(record_dict(cond, result, rec, snap))
            if rec.trial > 0:
                n_trial_records += 1
                if rec.floored:
                    floor_by_condition[cond.condition_id] += 1
    floor_total = sum(floor_by_condition.values())
    flagged = (n_trial_records > 0
               and floor_total / n_trial_records > FLOOR_FLAG_FRACTION)
    summary = summarize_records(records)
    return BatchResult(cfg, conditions, records, summary, floor_by_condition,
                       floor_total, n_trial_records, flagged)
