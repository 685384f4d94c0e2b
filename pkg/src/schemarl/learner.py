"""Episodic schema search with a two-table Q-learner.

Action selection is factored: a length-N table scores the first attribute
pick, an NxN table scores the (first, second) pair, so memory stays
O(N) + O(N^2) instead of growing with the number of schema states. Reward is
the drop in total workload cost caused by each join. Every run is a pure
function of the environment and the seed.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .catalog import Catalog, EntityFact
from .errors import InvalidActionError, SchemarlError
from .schema import (
    ConstraintPool,
    JoinAction,
    SchemaState,
    apply_join,
    init_state,
    signature,
    valid_actions,
)
from .shred import shred
from .workload import CostReport, Workload, workload_cost

# Used when every query is unanswerable on the initial schema, which leaves
# no base cost to scale the penalty from.
FALLBACK_PENALTY = 1000


@dataclass(frozen=True)
class LearnParams:
    alpha: float = 0.1
    gamma: float = 0.9
    greedy: float = 0.9
    episodes: int = 20
    max_steps: int | None = None  # None: attribute count - 1
    seed: int = 0
    baseline_time: float | None = None
    baseline_space: float | None = None

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0 <= self.gamma <= 1:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if not 0 <= self.greedy <= 1:
            raise ValueError(f"greedy must be in [0, 1], got {self.greedy}")
        if self.episodes < 1:
            raise ValueError(f"episodes must be positive, got {self.episodes}")
        if self.max_steps is not None and self.max_steps < 0:
            raise ValueError(f"max_steps must be non-negative, got {self.max_steps}")

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "gamma": self.gamma, "greedy": self.greedy,
                "episodes": self.episodes, "max_steps": self.max_steps,
                "seed": self.seed, "baseline_time": self.baseline_time,
                "baseline_space": self.baseline_space}

    @classmethod
    def from_json(cls, doc: dict) -> "LearnParams":
        known = {k: doc[k] for k in ("alpha", "gamma", "greedy", "episodes",
                                     "max_steps", "seed", "baseline_time",
                                     "baseline_space") if k in doc and doc[k] is not None}
        return cls(**known)


@dataclass
class QTables:
    """q1 scores the first attribute pick, q2 the ordered pair (a < b)."""

    q1: np.ndarray
    q2: np.ndarray

    @classmethod
    def zeros(cls, n_attrs: int) -> "QTables":
        return cls(q1=np.zeros(n_attrs), q2=np.zeros((n_attrs, n_attrs)))


class Environment:
    """Initial state, constraint pool, workload and memoized cost evaluation.

    With wall_clock=True the reward currency becomes measured evaluation
    microseconds instead of deterministic cost units; runs are then not
    reproducible and nothing in the test suite exercises this mode.
    """

    def __init__(self, catalog: Catalog, facts: list[EntityFact],
                 pool: ConstraintPool, workload: Workload,
                 wall_clock: bool = False):
        self.catalog = catalog
        self.pool = pool
        self.workload = workload
        self.wall_clock = wall_clock
        self.initial_tables = shred(catalog, facts)
        self.initial_state = init_state(self.initial_tables)
        base = workload_cost(workload, self.initial_state, pool,
                             unanswerable_penalty=0).total
        self.penalty = 10 * base if base > 0 else FALLBACK_PENALTY
        self._cache: dict[str, CostReport] = {}

    @property
    def n_attrs(self) -> int:
        return len(self.catalog)

    def cost(self, state: SchemaState) -> CostReport:
        if self.wall_clock:
            started = time.perf_counter()
            report = workload_cost(self.workload, state, self.pool,
                                   unanswerable_penalty=self.penalty)
            elapsed_us = int((time.perf_counter() - started) * 1e6)
            return CostReport(per_query=report.per_query, total=elapsed_us,
                              storage=report.storage)
        sig = signature(state)
        report = self._cache.get(sig)
        if report is None:
            report = workload_cost(self.workload, state, self.pool,
                                   unanswerable_penalty=self.penalty)
            self._cache[sig] = report
        return report


class StepRecord(NamedTuple):
    left: int
    right: int
    reward: int | float
    cost_after: int | float
    storage_after: int
    signature_after: str


@dataclass
class EpisodeRecord:
    episode: int
    steps: list[StepRecord]
    final_cost: int | float
    final_storage: int
    final_signature: str


class SeenEntry(NamedTuple):
    cost: int | float
    storage: int
    first_episode: int


class BestSchema(NamedTuple):
    signature: str
    cost: int | float
    storage: int


@dataclass
class RunResult:
    best_by_time: BestSchema
    best_by_space: BestSchema
    all_seen: dict[str, SeenEntry]
    episodes: list[EpisodeRecord]
    initial_cost: int | float
    initial_storage: int

    def to_json(self) -> dict:
        return {
            "initial": {"cost": self.initial_cost, "storage": self.initial_storage},
            "best_by_time": self.best_by_time._asdict(),
            "best_by_space": self.best_by_space._asdict(),
            "episodes_completed": len(self.episodes),
            "all_seen": {sig: {"cost": e.cost, "storage": e.storage,
                               "first_episode": e.first_episode}
                         for sig, e in sorted(self.all_seen.items())},
        }


def select_action(q: QTables, state: SchemaState, pool: ConstraintPool,
                  greedy: float, rng: np.random.Generator) -> JoinAction:
    """Pick a valid join action: exploit with probability `greedy` (first
    attribute by q1, partner by q2, ties to the lowest id), explore uniformly
    otherwise. Invalid pairs are never produced."""
    actions = valid_actions(pool, state)
    if not actions:
        raise InvalidActionError("terminal state: no valid join actions")
    if rng.random() < greedy:
        lefts = sorted({a for a, _ in actions})
        left = max(lefts, key=lambda l: (q.q1[l], -l))
        rights = sorted({b for a, b in actions if a == left})
        right = max(rights, key=lambda r: (q.q2[left, r], -r))
        return JoinAction(left, right)
    return actions[int(rng.integers(len(actions)))]


def td_update(q: QTables, s: SchemaState, act: JoinAction, reward: int | float,
              s_next: SchemaState, pool: ConstraintPool,
              alpha: float, gamma: float) -> QTables:
    """One temporal-difference step; both tables chase the same target.

    Bootstrap is the best q2 entry over actions valid in the next state
    (zero at terminal states). Returns fresh tables, inputs untouched.
    """
    next_actions = valid_actions(pool, s_next)
    bootstrap = max((q.q2[l, r] for l, r in next_actions), default=0.0)
    target = reward + gamma * bootstrap
    q1 = q.q1.copy()
    q2 = q.q2.copy()
    q2[act.left, act.right] += alpha * (target - q2[act.left, act.right])
    q1[act.left] += alpha * (target - q1[act.left])
    return QTables(q1=q1, q2=q2)


def run_episode(env: Environment, q: QTables, params: LearnParams,
                rng: np.random.Generator, episode: int = 0) -> tuple[QTables, EpisodeRecord]:
    """One pass from the initial schema: select, join, reward, update, until
    the step cap or a terminal state."""
    state = env.initial_state
    report = env.cost(state)
    max_steps = params.max_steps
    if max_steps is None:
        max_steps = max(env.n_attrs - 1, 0)
    steps: list[StepRecord] = []
    for _ in range(max_steps):
        if not valid_actions(env.pool, state):
            break
        act = select_action(q, state, env.pool, params.greedy, rng)
        next_state = apply_join(env.pool, state, act)
        next_report = env.cost(next_state)
        reward = report.total - next_report.total
        q = td_update(q, state, act, reward, next_state, env.pool,
                      params.alpha, params.gamma)
        steps.append(StepRecord(act.left, act.right, reward, next_report.total,
                                next_report.storage, signature(next_state)))
        state, report = next_state, next_report
    record = EpisodeRecord(episode=episode, steps=steps, final_cost=report.total,
                           final_storage=report.storage,
                           final_signature=signature(state))
    return q, record


def train(env: Environment, params: LearnParams,
          on_episode: Callable[[EpisodeRecord, BestSchema, BestSchema], None] | None = None,
          should_stop: Callable[[], bool] | None = None) -> RunResult:
    """Run the full episodic loop with one persistent Q-table pair and one
    seeded generator; deterministic given (env, params)."""
    rng = np.random.default_rng(params.seed)
    q = QTables.zeros(env.n_attrs)
    initial = env.cost(env.initial_state)
    all_seen: dict[str, SeenEntry] = {
        signature(env.initial_state): SeenEntry(initial.total, initial.storage, 0)
    }
    episodes: list[EpisodeRecord] = []
    for e in range(params.episodes):
        if should_stop is not None and should_stop():
            break
        q, record = run_episode(env, q, params, rng, episode=e)
        for step in record.steps:
            if step.signature_after not in all_seen:
                all_seen[step.signature_after] = SeenEntry(
                    step.cost_after, step.storage_after, e)
        episodes.append(record)
        if on_episode is not None:
            on_episode(record, _best(all_seen, by_space=False),
                       _best(all_seen, by_space=True))
    result = RunResult(
        best_by_time=_best(all_seen, by_space=False),
        best_by_space=_best(all_seen, by_space=True),
        all_seen=all_seen,
        episodes=episodes,
        initial_cost=initial.total,
        initial_storage=initial.storage,
    )
    return result


def _best(all_seen: dict[str, SeenEntry], by_space: bool) -> BestSchema:
    def rank(item):
        sig, entry = item
        primary = (entry.storage, entry.cost) if by_space else (entry.cost, entry.storage)
        return (*primary, sig)

    sig, entry = min(all_seen.items(), key=rank)
    return BestSchema(sig, entry.cost, entry.storage)


def brute_force_optimum(env: Environment, max_attrs: int = 8) -> BestSchema:
    """Exhaustive search oracle: BFS over every state reachable by valid
    joins, deduplicated by signature; minimal workload cost wins (ties go to
    smaller storage, then lexicographic signature)."""
    if env.n_attrs > max_attrs:
        raise SchemarlError(f"brute-force search refused: {env.n_attrs} attributes "
                            f"exceeds the bound of {max_attrs}")
    start = env.initial_state
    seen: dict[str, SchemaState] = {signature(start): start}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        for act in valid_actions(env.pool, state):
            nxt = apply_join(env.pool, state, act)
            sig = signature(nxt)
            if sig not in seen:
                seen[sig] = nxt
                queue.append(nxt)
    entries = {sig: env.cost(state) for sig, state in seen.items()}
    sig, report = min(entries.items(),
                      key=lambda kv: (kv[1].total, kv[1].storage, kv[0]))
    return BestSchema(sig, report.total, report.storage)
