"""Plug-in transfer entropy, shuffle-corrected effective transfer entropy, and
Markov-bootstrap inference on symbolized series.

All estimators are pure functions of (input, config, seed). Replications draw
from substreams derived deterministically from (seed, replication index), and
aggregation is order-insensitive, so results do not depend on how many worker
threads execute them.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    ConfigError,
    EmptyCounts,
    InsufficientData,
    InternalConsistencyError,
    LengthMismatch,
    SeriesTooShort,
)
from .symbolic import SymbolSeries, validate_cuts

NEGATIVE_CLAMP = 1e-12

# spawn-key domains for substream derivation
_DOMAIN_SHUFFLE = 1
_DOMAIN_BOOTSTRAP = 2
_DOMAIN_DIRECTION = 3

# below this many transition tuples a plain Python loop beats numpy dispatch
_SMALL_N = 64

Pattern = tuple[int, ...]
CountKey = tuple[int, Pattern, Pattern]


def substream(seed: int, domain: int, index: int) -> np.random.Generator:
    """Independent generator for one replication, derived from (seed, domain, index)."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(domain, index)))


def derive_seed(seed: int, domain: int, index: int) -> int:
    """Deterministic child seed; used to give each direction its own stream family."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(domain, index))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class TeConfig:
    """Estimator configuration.

    ``k`` and ``l`` are the target and source history lengths. ``block_order``
    is the Markov order of the bootstrap source regeneration; None means
    "follow l". The alphabet size is always len(quantile_cuts) + 1.
    """

    k: int = 1
    l: int = 1
    quantile_cuts: tuple[float, ...] = (0.05, 0.95)
    log_base: float = 2.0
    n_shuffles: int = 100
    n_bootstrap: int = 300
    block_order: int | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "quantile_cuts", validate_cuts(self.quantile_cuts))
        if self.k < 1 or self.l < 1:
            raise ConfigError("history lengths k and l must be >= 1")
        if self.log_base <= 1.0:
            raise ConfigError("log_base must be > 1")
        if self.n_shuffles < 1:
            raise ConfigError("n_shuffles must be >= 1")
        if self.n_bootstrap < 0:
            raise ConfigError("n_bootstrap must be >= 0")
        if self.block_order is not None and self.block_order < 1:
            raise ConfigError("block_order must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be unsigned")

    @property
    def alphabet_size(self) -> int:
        return len(self.quantile_cuts) + 1

    @property
    def effective_block_order(self) -> int:
        return self.block_order if self.block_order is not None else self.l

    def digest(self) -> str:
        """Short stable fingerprint for report rows."""
        payload = repr((self.k, self.l, self.quantile_cuts, self.log_base,
                        self.n_shuffles, self.n_bootstrap, self.effective_block_order,
                        self.seed))
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class TeEstimate:
    """One directional result; mirrors the TE / ETE / Std.Err. / p-value report schema."""

    direction: str
    te: float
    ete: float
    surrogate_mean: float
    std_err: float | None
    p_value: float | None
    n_effective: int
    config: TeConfig

    def __post_init__(self):
        if self.te < 0:
            raise InternalConsistencyError(f"te must be >= 0, got {self.te}")
        if self.ete != self.te - self.surrogate_mean:
            raise InternalConsistencyError("ete must equal te - surrogate_mean exactly")
        if self.std_err is not None and self.std_err < 0:
            raise InternalConsistencyError("std_err must be >= 0")
        if self.p_value is not None and not (0.0 <= self.p_value <= 1.0):
            raise InternalConsistencyError("p_value must lie in [0, 1]")


@dataclass(frozen=True)
class JointCounts:
    """Plug-in frequency table over (next target symbol, target history, source history).

    Histories are tuples ordered most-recent-first; the tuple at step t pairs
    target[t] with the target history ending at t-1 and the source history
    ending at t-1, so contemporaneous source values never predict the
    same-step target.
    """

    counts: Mapping[CountKey, int]
    k: int
    l: int
    alphabet_size: int

    @property
    def n_effective(self) -> int:
        return sum(self.counts.values())


def _decode_pattern(code: int, m: int, length: int) -> Pattern:
    out = []
    for _ in range(length):
        out.append(code % m)
        code //= m
    return tuple(out)


def _history_codes(arr: np.ndarray, offset: int, n: int, depth: int, m: int) -> np.ndarray:
    codes = np.zeros(n - offset, dtype=np.int64)
    weight = 1
    for j in range(1, depth + 1):
        codes += arr[offset - j: n - j] * weight
        weight *= m
    return codes


def _transition_counts(target: np.ndarray, source: np.ndarray,
                       k: int, l: int, m: int) -> dict[CountKey, int]:
    n = target.shape[0]
    h = max(k, l)
    if n - h <= _SMALL_N:
        counts: dict[CountKey, int] = {}
        tl = target.tolist()
        sl = source.tolist()
        if k == 1 and l == 1:
            prev_t = tl[0]
            prev_s = sl[0]
            for t in range(1, n):
                cur = tl[t]
                key = (cur, (prev_t,), (prev_s,))
                counts[key] = counts.get(key, 0) + 1
                prev_t = cur
                prev_s = sl[t]
            return counts
        for t in range(h, n):
            key = (tl[t], tuple(tl[t - k: t][::-1]), tuple(sl[t - l: t][::-1]))
            counts[key] = counts.get(key, 0) + 1
        return counts

    mk = m ** k
    ml = m ** l
    th = _history_codes(target, h, n, k, m)
    sh = _history_codes(source, h, n, l, m)
    codes = (target[h:] * mk + th) * ml + sh
    space = mk * ml * m
    if space <= (1 << 20):
        flat = np.bincount(codes, minlength=space)
        nz = np.flatnonzero(flat)
        cnt = flat[nz]
        uniq = nz
    else:
        uniq, cnt = np.unique(codes, return_counts=True)
    counts = {}
    for code, c in zip(uniq.tolist(), cnt.tolist()):
        sh_code = code % ml
        rest = code // ml
        th_code = rest % mk
        nxt = rest // mk
        counts[(nxt, _decode_pattern(th_code, m, k), _decode_pattern(sh_code, m, l))] = c
    return counts


def _check_pair(target: SymbolSeries, source: SymbolSeries, k: int, l: int) -> int:
    if len(target) != len(source):
        raise LengthMismatch(f"target has {len(target)} symbols, source has {len(source)}")
    h = max(k, l)
    if len(target) <= h:
        raise SeriesTooShort(f"need more than max(k, l) = {h} observations, got {len(target)}")
    m = max(target.alphabet_size, source.alphabet_size)
    if (k + l + 1) * math.log2(max(m, 2)) > 62:
        raise ConfigError("joint state space exceeds 64-bit encoding; reduce k, l or the alphabet")
    return m


def count_transitions(target: SymbolSeries, source: SymbolSeries, k: int, l: int) -> JointCounts:
    """Count (next, target history, source history) tuples.

    One tuple per step t from max(k, l) to len-1; the total equals
    len - max(k, l).
    """
    if k < 1 or l < 1:
        raise ConfigError("history lengths k and l must be >= 1")
    m = _check_pair(target, source, k, l)
    counts = _transition_counts(np.asarray(target.symbols), np.asarray(source.symbols), k, l, m)
    return JointCounts(counts=counts, k=k, l=l, alphabet_size=m)


def transfer_entropy(counts: JointCounts, log_base: float = 2.0) -> float:
    """Plug-in Shannon transfer entropy from a transition count table.

    Computes sum over observed cells of p(next, th, sh) *
    log[ p(next | th, sh) / p(next | th) ] with empirical conditionals;
    cells with zero joint probability contribute nothing. The result is a
    Kullback-Leibler quantity and therefore nonnegative; rounding noise
    below 1e-12 is clamped to zero, anything more negative is an internal
    error.
    """
    if not counts.counts:
        raise EmptyCounts("transition table is empty")
    if log_base <= 1.0:
        raise ConfigError("log_base must be > 1")
    total = 0
    ctx: dict[tuple[Pattern, Pattern], int] = {}
    nxt_th: dict[tuple[int, Pattern], int] = {}
    th_tot: dict[Pattern, int] = {}
    for (nxt, th, sh), c in counts.counts.items():
        total += c
        ctx_key = (th, sh)
        ctx[ctx_key] = ctx.get(ctx_key, 0) + c
        nt_key = (nxt, th)
        nxt_th[nt_key] = nxt_th.get(nt_key, 0) + c
        th_tot[th] = th_tot.get(th, 0) + c
    acc = 0.0
    for (nxt, th, sh), c in counts.counts.items():
        # p(n|th,sh)/p(n|th) = (c * th_total) / (ctx_total * nxt_th_total), exact in ints
        acc += c * math.log(c * th_tot[th] / (ctx[(th, sh)] * nxt_th[(nxt, th)]))
    te = acc / (total * math.log(log_base))
    if te < 0.0:
        if te < -NEGATIVE_CLAMP:
            raise InternalConsistencyError(f"plug-in TE below -{NEGATIVE_CLAMP}: {te}")
        te = 0.0
    return te


def _map_indexed(fn: Callable[[int], float], n: int, n_jobs: int) -> list:
    if n_jobs <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=n_jobs) as ex:
        return list(ex.map(fn, range(n)))


def shuffle_surrogate_te(target: SymbolSeries, source: SymbolSeries, config: TeConfig,
                         permutations: Sequence[np.ndarray] | None = None,
                         n_jobs: int = 1) -> np.ndarray:
    """TE values after independent uniform permutations of the source symbols.

    The target is never touched. Each replication's permutation comes from its
    own substream of config.seed, so the returned vector is independent of
    execution order and parallel width. ``permutations`` overrides the drawn
    permutations (test hook, e.g. a forced identity permutation).
    """
    m = _check_pair(target, source, config.k, config.l)
    t = np.asarray(target.symbols)
    s = np.asarray(source.symbols)
    n = s.shape[0]
    if permutations is None:
        perms = [substream(config.seed, _DOMAIN_SHUFFLE, i).permutation(n)
                 for i in range(config.n_shuffles)]
    else:
        perms = [np.asarray(p) for p in permutations]
        if not perms:
            raise ConfigError("need at least one permutation")

    def one(i: int) -> float:
        counts = _transition_counts(t, s[perms[i]], config.k, config.l, m)
        return transfer_entropy(JointCounts(counts, config.k, config.l, m), config.log_base)

    return np.array(_map_indexed(one, len(perms), n_jobs))


def effective_transfer_entropy(target: SymbolSeries, source: SymbolSeries, config: TeConfig,
                               direction: str = "source->target",
                               n_jobs: int = 1) -> TeEstimate:
    """Shuffle-corrected transfer entropy: raw TE minus the mean surrogate TE.

    Inference fields (std_err, p_value) are left absent; see
    :func:`bootstrap_inference` or :func:`estimate`.
    """
    counts = count_transitions(target, source, config.k, config.l)
    te = transfer_entropy(counts, config.log_base)
    surrogates = shuffle_surrogate_te(target, source, config, n_jobs=n_jobs)
    surrogate_mean = float(surrogates.mean())
    return TeEstimate(direction=direction, te=te, ete=te - surrogate_mean,
                      surrogate_mean=surrogate_mean, std_err=None, p_value=None,
                      n_effective=counts.n_effective, config=config)


def _markov_null_sources(source: np.ndarray, m: int, order: int,
                         n_reps: int, seed: int) -> np.ndarray:
    """Regenerate the source ``n_reps`` times from its own order-q transition table.

    Preserves the source's dynamics while breaking any cross-coupling to the
    target. All replications evolve jointly (vectorized across chains), each
    driven by uniforms from its own substream.
    """
    n = source.shape[0]
    if n <= order:
        raise SeriesTooShort(f"need more than block_order = {order} observations")
    n_states = m ** order
    if n_states * m > (1 << 24):
        raise ConfigError("bootstrap state space too large; reduce block_order or alphabet")
    ctx = _history_codes(source, order, n, order, m)
    nxt = source[order:]
    table = np.bincount(ctx * m + nxt, minlength=n_states * m).reshape(n_states, m)
    row_tot = table.sum(axis=1)
    visited = row_tot > 0
    cum = np.zeros((n_states, m))
    cum[visited] = np.cumsum(table[visited] / row_tot[visited, None], axis=1)
    cum[visited, -1] = 1.0  # exact upper bound regardless of rounding

    out = np.empty((n_reps, n), dtype=np.int64)
    states = np.empty(n_reps, dtype=np.int64)
    uniforms = np.empty((n_reps, n - order))
    for i in range(n_reps):
        rng = substream(seed, _DOMAIN_BOOTSTRAP, i)
        init = int(ctx[int(rng.integers(ctx.shape[0]))])
        states[i] = init
        out[i, :order] = _decode_pattern(init, m, order)[::-1]
        uniforms[i] = rng.random(n - order)

    carry = m ** (order - 1)
    for t in range(order, n):
        if not visited[states].all():
            raise InsufficientData(
                "bootstrap regeneration reached a source Markov state never visited in the data"
            )
        rows = cum[states]
        drawn = (uniforms[:, t - order, None] > rows).sum(axis=1)
        out[:, t] = drawn
        states = drawn + m * (states % carry)
    return out


def bootstrap_inference(target: SymbolSeries, source: SymbolSeries, config: TeConfig,
                        observed_te: float | None = None,
                        n_jobs: int = 1) -> tuple[float | None, float | None]:
    """Markov block-bootstrap null distribution for the observed TE.

    The source is regenerated ``n_bootstrap`` times at Markov order
    ``block_order`` (its own dynamics preserved, coupling destroyed); returns
    (std_err, p_value) where p is the fraction of null TEs at or above the
    observed TE. With n_bootstrap = 0 both are reported absent.
    """
    if config.n_bootstrap == 0:
        return None, None
    m = _check_pair(target, source, config.k, config.l)
    t = np.asarray(target.symbols)
    s = np.asarray(source.symbols)
    if observed_te is None:
        observed_te = transfer_entropy(count_transitions(target, source, config.k, config.l),
                                       config.log_base)
    nulls_src = _markov_null_sources(s, m, config.effective_block_order,
                                     config.n_bootstrap, config.seed)

    def one(i: int) -> float:
        counts = _transition_counts(t, nulls_src[i], config.k, config.l, m)
        return transfer_entropy(JointCounts(counts, config.k, config.l, m), config.log_base)

    null_tes = np.array(_map_indexed(one, config.n_bootstrap, n_jobs))
    std_err = float(null_tes.std(ddof=1)) if config.n_bootstrap > 1 else 0.0
    p_value = float(np.count_nonzero(null_tes >= observed_te) / config.n_bootstrap)
    return std_err, p_value


def estimate(target: SymbolSeries, source: SymbolSeries, config: TeConfig,
             direction: str = "source->target", n_jobs: int = 1) -> TeEstimate:
    """Full directional estimate: TE, ETE, and bootstrap inference in one record."""
    est = effective_transfer_entropy(target, source, config, direction=direction, n_jobs=n_jobs)
    if config.n_bootstrap > 0:
        std_err, p_value = bootstrap_inference(target, source, config,
                                               observed_te=est.te, n_jobs=n_jobs)
        est = replace(est, std_err=std_err, p_value=p_value)
    return est
