"""Central-difference gradient oracle and randomized smoothness checks.

The analytic gradients in :mod:`similarity` and :mod:`losses` are verified
against central finite differences over individual embedding-table
entries. Configurations sitting near a kink (greedy-match tie, ReLU
boundary, selection-budget boundary, near-zero embedding norm) are
detected and skipped: subgradients are well-defined there, finite
differences are not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .encoder import EncoderParams, encode, init_params
from .losses import LossWeights, loss_grad, total_loss
from .similarity import sim, sim_grad

DEFAULT_STEP = 1e-5
DEFAULT_TOL = 1e-4

# Margins keeping a 1e-5 step safely away from every kink.
ARGMAX_MARGIN = 5e-3
RELU_MARGIN = 1e-3
BUDGET_MARGIN = 1e-3
NORM_FLOOR = 1e-2


class FixedIdf:
    """Test/oracle IDF source: explicit per-token weights with a fallback."""

    def __init__(self, weights: dict[str, float], default: float = 1.0):
        self.weights = dict(weights)
        self.default = default

    def token_weight(self, token: str) -> float:
        return self.weights.get(token, self.default)


def finite_difference_rows(
    func: Callable[[], float],
    params: EncoderParams,
    rows: Sequence[int],
    step: float = DEFAULT_STEP,
) -> dict[int, np.ndarray]:
    """Central differences of ``func`` w.r.t. each entry of the given rows.

    ``func`` must read ``params.table``; entries are perturbed in place and
    restored exactly.
    """
    grads: dict[int, np.ndarray] = {}
    table = params.table
    for row in rows:
        grad_row = np.zeros(params.dim)
        for col in range(params.dim):
            original = table[row, col]
            table[row, col] = original + step
            upper = func()
            table[row, col] = original - step
            lower = func()
            table[row, col] = original
            grad_row[col] = (upper - lower) / (2.0 * step)
        grads[row] = grad_row
    return grads


def max_relative_error(
    analytic: dict[int, np.ndarray],
    numeric: dict[int, np.ndarray],
    dim: int,
    floor: float = 1e-6,
) -> float:
    """Worst entrywise |a - n| / max(|a|, |n|, floor) over the union of rows."""
    worst = 0.0
    for row in set(analytic) | set(numeric):
        a = analytic.get(row, np.zeros(dim))
        b = numeric.get(row, np.zeros(dim))
        denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
        worst = max(worst, float(np.max(np.abs(a - b) / denom)))
    return worst


def _norms(params: EncoderParams, tokens: Sequence[str]) -> np.ndarray:
    return np.linalg.norm(encode(params, tokens), axis=1)


def _argmax_margin(params: EncoderParams, query: Sequence[str], cand: Sequence[str]) -> float:
    """Worst gap between the best and second-best cosine over query tokens."""
    x = encode(params, query)
    y = encode(params, cand)
    x_hat = x / np.maximum(np.linalg.norm(x, axis=1), 1e-300)[:, None]
    y_hat = y / np.maximum(np.linalg.norm(y, axis=1), 1e-300)[:, None]
    cosines = x_hat @ y_hat.T
    if cosines.shape[1] == 1:
        return np.inf
    top2 = np.sort(cosines, axis=1)[:, -2:]
    return float(np.min(top2[:, 1] - top2[:, 0]))


def _sim_config_is_smooth(
    params: EncoderParams,
    idf: FixedIdf,
    query: Sequence[str],
    cand: Sequence[str],
) -> bool:
    if min(_norms(params, query).min(), _norms(params, cand).min()) < NORM_FLOOR:
        return False
    return _argmax_margin(params, query, cand) > ARGMAX_MARGIN


@dataclass
class SimConfig:
    params: EncoderParams
    idf: FixedIdf
    query: list[str]
    cand: list[str]


@dataclass
class LossConfig:
    params: EncoderParams
    idf: FixedIdf
    ref: list[str]
    matched: list[str]
    answers: list[list[str]]
    weights: LossWeights


@dataclass
class GradCheckReport:
    checked: int
    skipped: int
    max_rel_err: float
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures and self.checked > 0


def _random_tokens(rng: np.random.Generator, vocab: list[str], low: int, high: int) -> list[str]:
    size = int(rng.integers(low, high + 1))
    return [vocab[i] for i in rng.integers(0, len(vocab), size=size)]


def random_sim_config(rng: np.random.Generator) -> SimConfig:
    vocab = [f"w{i}" for i in range(int(rng.integers(6, 11)))]
    dim = int(rng.integers(3, 5))
    alpha = float(rng.choice([0.0, 0.3]))
    params = init_params(int(rng.integers(0, 2**31)), dim, vocab, context_alpha=alpha)
    # Larger rows than the default init keep norms clear of the floor.
    params.table[:] = rng.uniform(-1.0, 1.0, size=params.table.shape)
    idf = FixedIdf({w: float(rng.uniform(0.5, 2.5)) for w in vocab}, default=1.0)
    return SimConfig(
        params=params,
        idf=idf,
        query=_random_tokens(rng, vocab, 2, 4),
        cand=_random_tokens(rng, vocab, 2, 4),
    )


def random_loss_config(rng: np.random.Generator) -> LossConfig:
    base = random_sim_config(rng)
    answers = [_random_tokens(rng, list(base.idf.weights), 2, 4) for _ in range(int(rng.integers(2, 5)))]
    weights = LossWeights(
        match_weight=float(rng.uniform(0.005, 0.5)),
        answer_weight=float(rng.uniform(0.005, 0.5)),
        n_select=int(rng.integers(1, 4)),
    )
    return LossConfig(
        params=base.params,
        idf=base.idf,
        ref=base.query,
        matched=base.cand,
        answers=answers,
        weights=weights,
    )


def _loss_config_is_smooth(cfg: LossConfig) -> bool:
    if not _sim_config_is_smooth(cfg.params, cfg.idf, cfg.ref, cfg.matched):
        return False
    s_mat = sim(cfg.ref, cfg.matched, cfg.params, cfg.idf)
    if abs(s_mat) < RELU_MARGIN:
        return False
    scores = []
    for toks in cfg.answers:
        if not _sim_config_is_smooth(cfg.params, cfg.idf, cfg.ref, toks):
            return False
        s = sim(cfg.ref, toks, cfg.params, cfg.idf)
        if abs(s) < RELU_MARGIN:
            return False
        scores.append(max(0.0, s))
    budget_gap = min(cfg.weights.n_select, len(scores)) - sum(scores)
    return abs(budget_gap) > BUDGET_MARGIN


def _touched_rows(params: EncoderParams, token_lists: Sequence[Sequence[str]]) -> list[int]:
    rows: set[int] = set()
    for tokens in token_lists:
        rows.update(int(r) for r in params.row_ids(tokens))
    # One untouched row, when available, to confirm its gradient is zero.
    for row in range(params.table.shape[0]):
        if row not in rows:
            rows.add(row)
            break
    return sorted(rows)


def check_sim_gradients(
    trials: int = 100,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    step: float = DEFAULT_STEP,
    max_attempts_factor: int = 50,
) -> GradCheckReport:
    """Compare sim_grad with central differences on random smooth configs."""
    rng = np.random.default_rng(seed)
    checked = skipped = 0
    worst = 0.0
    failures: list[str] = []
    attempts = 0
    while checked < trials and attempts < trials * max_attempts_factor:
        attempts += 1
        cfg = random_sim_config(rng)
        if not _sim_config_is_smooth(cfg.params, cfg.idf, cfg.query, cfg.cand):
            skipped += 1
            continue
        analytic = sim_grad(cfg.query, cfg.cand, cfg.params, cfg.idf)
        numeric = finite_difference_rows(
            lambda: sim(cfg.query, cfg.cand, cfg.params, cfg.idf),
            cfg.params,
            _touched_rows(cfg.params, [cfg.query, cfg.cand]),
            step=step,
        )
        err = max_relative_error(analytic, numeric, cfg.params.dim)
        worst = max(worst, err)
        if err > tol:
            failures.append(f"sim trial {checked}: rel err {err:.3e} > {tol:.1e}")
        checked += 1
    return GradCheckReport(checked=checked, skipped=skipped, max_rel_err=worst, failures=failures)


def check_loss_gradients(
    trials: int = 100,
    tol: float = DEFAULT_TOL,
    seed: int = 0,
    step: float = DEFAULT_STEP,
    max_attempts_factor: int = 50,
) -> GradCheckReport:
    """Compare loss_grad with central differences on random smooth configs."""
    rng = np.random.default_rng(seed)
    checked = skipped = 0
    worst = 0.0
    failures: list[str] = []
    attempts = 0
    while checked < trials and attempts < trials * max_attempts_factor:
        attempts += 1
        cfg = random_loss_config(rng)
        if not _loss_config_is_smooth(cfg):
            skipped += 1
            continue

        def objective() -> float:
            return total_loss(
                0.0, cfg.ref, cfg.matched, cfg.answers, cfg.params, cfg.idf, cfg.weights
            ).total

        analytic = loss_grad(cfg.ref, cfg.matched, cfg.answers, cfg.params, cfg.idf, cfg.weights)
        numeric = finite_difference_rows(
            objective,
            cfg.params,
            _touched_rows(cfg.params, [cfg.ref, cfg.matched, *cfg.answers]),
            step=step,
        )
        err = max_relative_error(analytic, numeric, cfg.params.dim)
        worst = max(worst, err)
        if err > tol:
            failures.append(f"loss trial {checked}: rel err {err:.3e} > {tol:.1e}")
        checked += 1
    return GradCheckReport(checked=checked, skipped=skipped, max_rel_err=worst, failures=failures)
