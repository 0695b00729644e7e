"""Desk-scale simulation of the random linear secure modulo-sum protocol.

Player ``i`` holds a message ``m_i`` in F_q^k and draws a scramble vector
``l_i`` in F_q^k'.  It sends ``X_i = G1 (G3 (m_i, l_i), E_i)`` over ``n``
channel uses, where ``G1``, ``G3`` and the coset vectors ``E_i`` are shared
with the receiver.  The receiver computes the exact MAP estimate of
``m_1 + ... + m_c`` by enumerating every message/scramble tuple.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binomtest

from .bound import coalitions
from .channel import MacModel
from .gf import CodePair, FieldVector, index_to_vector, is_prime, make_code_pair, vector_to_index
from .mixture import InfoEstimate

__all__ = [
    "DEFAULT_CAP",
    "ProtocolConfig",
    "CodeInstance",
    "SimResult",
    "build_code",
    "encode",
    "decode",
    "error_rate",
    "estimate_leakage",
    "average_leakage",
    "run_experiment",
    "proper_coalitions",
]

DEFAULT_CAP = 2**16
_BATCH_CELLS = 2**21  # trials x hypotheses evaluated per vectorised step


@dataclass(frozen=True)
class ProtocolConfig:
    q: int
    l: int
    n: int
    k: int
    kprime: int
    c: int
    channel: MacModel
    trials: int = 10_000
    seed: int = 0
    leak_samples: int = 10_000
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if not is_prime(self.q):
            raise ValueError(f"q = {self.q} is not prime")
        if min(self.l, self.n, self.c) < 1 or min(self.k, self.kprime) < 0:
            raise ValueError("need l, n, c >= 1 and k, k' >= 0")
        if self.k + self.kprime < 1 or self.k + self.kprime > self.n * self.l:
            raise ValueError(f"need 1 <= k + k' <= n*l = {self.n * self.l}")
        ch = self.channel
        if (ch.q, ch.l, ch.c) != (self.q, self.l, self.c):
            raise ValueError(
                f"channel alphabet (q={ch.q}, l={ch.l}, c={ch.c}) does not match the protocol"
            )
        if self.tuple_count > self.cap:
            raise ValueError(
                f"q^(c(k+k')) = {self.tuple_count} exceeds the enumeration cap {self.cap}; "
                "lower k, k' or c"
            )

    @property
    def pair_count(self) -> int:
        return self.q ** (self.k + self.kprime)

    @property
    def tuple_count(self) -> int:
        return self.pair_count**self.c

    @property
    def coset_dim(self) -> int:
        return self.n * self.l - self.k - self.kprime


@dataclass(frozen=True)
class CodeInstance:
    code: CodePair
    e_vectors: tuple[FieldVector, ...]
    config: ProtocolConfig

    @cached_property
    def pairs(self) -> np.ndarray:
        """Every ``(m, l)`` vector, shape ``(q^(k+k'), k+k')``; messages first."""
        cfg = self.config
        return index_to_vector(np.arange(cfg.pair_count), cfg.k + cfg.kprime, cfg.q)

    @cached_property
    def pair_message(self) -> np.ndarray:
        """Message index of each pair."""
        cfg = self.config
        return vector_to_index(self.pairs[:, : cfg.k], cfg.q) if cfg.k else np.zeros(cfg.pair_count, np.int64)

    def codewords(self, i: int, pairs: np.ndarray, e: np.ndarray | None = None) -> np.ndarray:
        """Raw codewords in F_q^(nl) for player ``i`` (1-based)."""
        code = self.code
        f = code.g3.apply(pairs)
        e = self.e_vectors[i - 1].entries if e is None else e
        e = np.broadcast_to(e, f.shape[:-1] + (code.coset_dim,))
        return code.g1.apply(np.concatenate([f, e], axis=-1))

    def symbols(self, words: np.ndarray) -> np.ndarray:
        """Split codewords into ``n`` channel symbols (input indices)."""
        cfg = self.config
        return vector_to_index(words.reshape(words.shape[:-1] + (cfg.n, cfg.l)), cfg.q)

    @cached_property
    def codebook(self) -> np.ndarray:
        """Channel symbols of every pair for every player: ``(c, Q, n)``."""
        return np.stack([self.symbols(self.codewords(i, self.pairs))
                         for i in range(1, self.config.c + 1)])

    @cached_property
    def tuples(self) -> np.ndarray:
        cfg = self.config
        return index_to_vector(np.arange(cfg.tuple_count), cfg.c, cfg.pair_count)

    @cached_property
    def tuple_symbols(self) -> np.ndarray:
        """``(N, n, c)`` channel inputs of every pair tuple."""
        cb = self.codebook
        per_player = [cb[i][self.tuples[:, i]] for i in range(self.config.c)]  # (N, n) each
        return np.stack(per_player, axis=-1)

    def message_labels(self, players) -> np.ndarray:
        """Joint index of ``(m_i)_{i in players}`` (1-based) for every tuple."""
        cfg = self.config
        msg = self.pair_message[self.tuples]  # (N, c)
        label = np.zeros(len(msg), dtype=np.int64)
        for i in players:
            label = label * cfg.q**cfg.k + msg[:, i - 1]
        return label

    @cached_property
    def sum_labels(self) -> np.ndarray:
        cfg = self.config
        m = self.pairs[self.tuples][..., : cfg.k].sum(axis=1) % cfg.q
        return vector_to_index(m, cfg.q) if cfg.k else np.zeros(len(self.tuples), np.int64)


def build_code(config: ProtocolConfig, rng: np.random.Generator) -> CodeInstance:
    code = make_code_pair(config.n, config.l, config.k, config.kprime, config.q, rng)
    es = tuple(FieldVector.random(config.coset_dim, config.q, rng) for _ in range(config.c))
    return CodeInstance(code, es, config)


def encode(instance: CodeInstance, i: int, m: FieldVector, l: FieldVector) -> FieldVector:
    """Codeword ``G1 (G3 (m, l), E_i)`` of player ``i`` (1-based)."""
    cfg = instance.config
    if m.dim != cfg.k or l.dim != cfg.kprime:
        raise ValueError(f"need dim(m) = {cfg.k} and dim(l) = {cfg.kprime}")
    if not 1 <= i <= cfg.c:
        raise ValueError(f"player {i} does not exist")
    return FieldVector(instance.codewords(i, m.concat(l).entries), cfg.q)


def _loglik(symbols: np.ndarray, mac: MacModel, ys: np.ndarray) -> np.ndarray:
    """``(T, N)`` log-likelihood of each hypothesis for each received block."""
    out = np.zeros((ys.shape[0], symbols.shape[0]))
    for t in range(ys.shape[1]):
        out += mac.log_density_batch(ys[:, t], symbols[:, t, :])
    return out


def _group_logsumexp(ll: np.ndarray, labels: np.ndarray, groups: int) -> np.ndarray:
    out = np.full((ll.shape[0], groups), -np.inf)
    for g in range(groups):
        sel = labels == g
        if sel.any():
            out[:, g] = logsumexp(ll[:, sel], axis=1)
    return out


def _argmax_random_ties(scores: np.ndarray, rng: np.random.Generator, atol: float = 1e-9) -> np.ndarray:
    best = scores.max(axis=1, keepdims=True)
    tied = scores >= best - atol
    keys = np.where(tied, rng.random(scores.shape), -1.0)
    return keys.argmax(axis=1)


@dataclass(frozen=True)
class _Hypotheses:
    symbols: np.ndarray  # (N, n, c)
    sum_labels: np.ndarray  # (N,)


def _hypotheses(instance: CodeInstance, decoder: str) -> _Hypotheses:
    if decoder == "full":
        return _Hypotheses(instance.tuple_symbols, instance.sum_labels)
    if decoder != "sum":
        raise ValueError(f"unknown decoder {decoder!r}")
    # Receiver knows only E_1 + ... + E_c: every split of that sum is a hypothesis.
    cfg = instance.config
    d = cfg.coset_dim
    splits = cfg.q ** (d * (cfg.c - 1))
    if cfg.tuple_count * splits > cfg.cap:
        raise ValueError("sum-knowledge decoding exceeds the enumeration cap")
    e_total = sum(e.entries for e in instance.e_vectors) % cfg.q
    free = index_to_vector(np.arange(splits), d * (cfg.c - 1), cfg.q).reshape(splits, cfg.c - 1, d)
    last = (e_total - free.sum(axis=1)) % cfg.q
    es = np.concatenate([free, last[:, None, :]], axis=1)  # (S, c, d)
    pairs = instance.pairs[instance.tuples]  # (N, c, k+k')
    syms = []
    for s in range(splits):
        per = [instance.symbols(instance.codewords(i + 1, pairs[:, i], es[s, i])) for i in range(cfg.c)]
        syms.append(np.stack(per, axis=-1))
    return _Hypotheses(np.concatenate(syms), np.tile(instance.sum_labels, splits))


def decode(instance: CodeInstance, mac: MacModel, y_sequence, rng: np.random.Generator,
           decoder: str = "full") -> FieldVector:
    """MAP estimate of the modulo sum from one received block of ``n`` symbols."""
    ys = np.asarray(y_sequence)
    if ys.shape != (instance.config.n,):
        raise ValueError(f"expected {instance.config.n} received symbols")
    idx = _decode_batch(instance, mac, ys[None, :], rng, _hypotheses(instance, decoder))[0]
    cfg = instance.config
    return FieldVector(index_to_vector(idx, cfg.k, cfg.q), cfg.q)


def _decode_batch(instance, mac, ys, rng, hyp: _Hypotheses) -> np.ndarray:
    cfg = instance.config
    ll = _loglik(hyp.symbols, mac, ys)
    post = _group_logsumexp(ll, hyp.sum_labels, cfg.q**cfg.k)
    return _argmax_random_ties(post, rng)


def _draw_blocks(instance: CodeInstance, mac: MacModel, size: int, rng: np.random.Generator):
    cfg = instance.config
    tup = rng.integers(0, cfg.pair_count, size=(size, cfg.c))
    idx = vector_to_index(tup, cfg.pair_count) if cfg.c > 1 else tup[:, 0]
    ys = mac.sample(instance.tuple_symbols[idx], rng)  # (T, n)
    return idx, ys


def error_rate(instance: CodeInstance, mac: MacModel, trials: int, rng: np.random.Generator,
               decoder: str = "full") -> tuple[int, int]:
    """Count decoding errors of the modulo sum over ``trials`` blocks."""
    hyp = _hypotheses(instance, decoder)
    batch = max(1, _BATCH_CELLS // len(hyp.symbols))
    errors, done = 0, 0
    while done < trials:
        size = min(batch, trials - done)
        idx, ys = _draw_blocks(instance, mac, size, rng)
        est = _decode_batch(instance, mac, ys, rng, hyp)
        errors += int((est != instance.sum_labels[idx]).sum())
        done += size
    return errors, trials


def estimate_leakage(instance: CodeInstance, mac: MacModel, J, samples: int,
                     rng: np.random.Generator) -> InfoEstimate:
    """Monte Carlo ``I(Y^n; (M_i)_{i in J})`` for this code instance.

    Each sample draws all messages and scrambles, transmits, and averages
    ``ln p(y | m_J) - ln p(y)``; both densities are exact finite mixtures
    over the remaining message/scramble variables.
    """
    cfg = instance.config
    J = tuple(sorted(J))
    if not J or len(J) >= cfg.c or not set(J) <= set(range(1, cfg.c + 1)):
        raise ValueError("J must be a nonempty proper subset of the players")
    labels = instance.message_labels(J)
    groups = (cfg.q**cfg.k) ** len(J)
    batch = max(1, _BATCH_CELLS // cfg.tuple_count)
    log_n = math.log(cfg.tuple_count)
    log_group = np.log(np.bincount(labels, minlength=groups).astype(float))
    vals = []
    done = 0
    while done < samples:
        size = min(batch, samples - done)
        idx, ys = _draw_blocks(instance, mac, size, rng)
        ll = _loglik(instance.tuple_symbols, mac, ys)
        lp_all = logsumexp(ll, axis=1) - log_n
        by_group = _group_logsumexp(ll, labels, groups) - log_group
        lp_cond = by_group[np.arange(size), labels[idx]]
        vals.append(lp_cond - lp_all)
        done += size
    v = np.concatenate(vals)
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return InfoEstimate(float(v.mean()), "monte-carlo", se, int(v.size))


def proper_coalitions(c: int) -> list[tuple[int, ...]]:
    return sorted({J for J, _ in coalitions(c)}, key=lambda J: (len(J), J))


def average_leakage(config: ProtocolConfig, J, draws: int, samples: int,
                    rng: np.random.Generator) -> InfoEstimate:
    """Leakage averaged over ``draws`` independent code instances."""
    vals = np.array([
        estimate_leakage(build_code(config, rng), config.channel, J, samples, rng).value
        for _ in range(draws)
    ])
    se = float(vals.std(ddof=1) / math.sqrt(draws)) if draws > 1 else 0.0
    return InfoEstimate(float(vals.mean()), "monte-carlo", se, draws * samples)


@dataclass(frozen=True)
class SimResult:
    errors: int
    trials: int
    ci_low: float
    ci_high: float
    leakage: dict = field(default_factory=dict)

    @property
    def error_rate(self) -> float:
        return self.errors / self.trials if self.trials else 0.0


def _wilson(errors: int, trials: int) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    ci = binomtest(errors, trials).proportion_ci(0.95, method="wilson")
    return float(ci.low), float(ci.high)


def run_experiment(config: ProtocolConfig, rng: np.random.Generator | None = None,
                   coalition_list=None, decoder: str = "full") -> SimResult:
    """Build one code, measure the modulo-sum error rate and per-coalition leakage.

    With ``rng=None`` the generator is seeded from ``config.seed``, so equal
    configs give identical results.
    """
    rng = np.random.default_rng(config.seed) if rng is None else rng
    inst = build_code(config, rng)
    errors, trials = error_rate(inst, config.channel, config.trials, rng, decoder)
    lo, hi = _wilson(errors, trials)
    leak = {}
    targets = proper_coalitions(config.c) if coalition_list is None else coalition_list
    for J in targets:
        leak[tuple(J)] = estimate_leakage(inst, config.channel, J, config.leak_samples, rng)
    return SimResult(errors, trials, lo, hi, leak)
