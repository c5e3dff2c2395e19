"""Stationary symbol-process models with exact marginals and samplers.

Three families are supported:

* ``FiniteMarkovChain``: a row-stochastic transition matrix plus its
  stationary vector; word probabilities are products of transition entries.
* ``FunctionMarkovModel``: a hidden finite chain observed through a symbol
  map; word probabilities are products of nonnegative transfer matrices.
* ``LadderChain``: a birth-and-reset chain on the integers, truncated to a
  finite window with a certified bound on the stationary mass lost.

All quantities are in nats. Zero-probability words yield ``-inf`` rather
than raising, so downstream estimators can surface absolute-continuity
failures explicitly.
"""

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (
    AlphabetMismatch,
    BudgetExceeded,
    NonStochastic,
    NonUniqueStationary,
    NotSurjective,
    SymbolOutOfRange,
    TruncationBreach,
    TruncationTooSmall,
)
from .rng import make_generator

ROW_SUM_TOL = 1e-12
STATIONARY_TOL = 1e-10


@dataclass(frozen=True)
class Alphabet:
    """Finite symbol set; symbols are the indices ``0..size-1``."""

    size: int
    labels: tuple | None = None

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("alphabet size must be at least 1")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.size:
                raise ValueError("labels must have exactly one entry per symbol")
            if len(set(labels)) != len(labels):
                raise ValueError("labels must be distinct")
            object.__setattr__(self, "labels", labels)

    def label(self, symbol: int) -> str:
        return self.labels[symbol] if self.labels is not None else str(symbol)


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FiniteMarkovChain:
    """Stationary Markov chain given by transitions ``P`` and stationary ``pi``."""

    alphabet: Alphabet
    transitions: np.ndarray
    stationary: np.ndarray

    def __post_init__(self):
        P = _frozen_array(self.transitions)
        pi = _frozen_array(self.stationary)
        n = self.alphabet.size
        if P.shape != (n, n):
            raise ValueError(f"transition matrix must be {n}x{n}")
        _require_stochastic(P)
        if pi.shape != (n,):
            raise ValueError("stationary vector has wrong length")
        if np.any(pi < 0) or abs(pi.sum() - 1.0) > ROW_SUM_TOL:
            raise ValueError("stationary vector is not a probability vector")
        if np.max(np.abs(pi @ P - pi)) > STATIONARY_TOL:
            raise ValueError("stationary vector does not satisfy pi P = pi")
        if np.any(pi <= 0):
            raise ValueError("stationary vector must be strictly positive")
        object.__setattr__(self, "transitions", P)
        object.__setattr__(self, "stationary", pi)

    @classmethod
    def from_transitions(cls, transitions, labels=None) -> "FiniteMarkovChain":
        """Build a chain, solving for the unique stationary vector."""
        P = np.asarray(transitions, dtype=float)
        pi = stationary_distribution(P)
        return cls(Alphabet(P.shape[0], labels), P, pi)

    @property
    def model_id(self) -> str:
        return _model_id(self)


@dataclass(frozen=True)
class FunctionMarkovModel:
    """Hidden Markov chain observed through a symbol-wise map.

    ``transfer[a]`` is the matrix with entries ``P_hidden[z, z']`` where the
    map sends ``z'`` to observed symbol ``a``, zero elsewhere; word
    probabilities are ``pi @ transfer[a_1] @ ... @ transfer[a_n] @ 1``.
    """

    hidden: FiniteMarkovChain
    observation_map: np.ndarray
    alphabet: Alphabet
    transfer: np.ndarray

    def __post_init__(self):
        obs_map = _frozen_array(self.observation_map, dtype=np.int64)
        transfer = _frozen_array(self.transfer)
        nz = self.hidden.alphabet.size
        if obs_map.shape != (nz,):
            raise ValueError("observation map must cover every hidden symbol")
        if transfer.shape != (self.alphabet.size, nz, nz):
            raise ValueError("transfer tensor has wrong shape")
        if np.any(transfer.sum(axis=0) != self.hidden.transitions):
            raise ValueError("transfer matrices must sum to the hidden transitions")
        object.__setattr__(self, "observation_map", obs_map)
        object.__setattr__(self, "transfer", transfer)

    @property
    def model_id(self) -> str:
        return _model_id(self)


@dataclass(frozen=True)
class Ramp:
    """Reset-depth function for the ladder chain, restricted to a named family."""

    kind: str
    rate: int = 1
    table: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("identity", "affine", "table"):
            raise ValueError(f"unknown ramp kind {self.kind!r}")
        if self.kind == "affine" and self.rate < 1:
            raise ValueError("affine ramp rate must be a positive integer")
        if self.kind == "table":
            if not self.table:
                raise ValueError("table ramp needs values")
            tab = tuple(int(v) for v in self.table)
            if any(v < 0 for v in tab):
                raise ValueError("table ramp values must be nonnegative")
            if any(b < a for a, b in zip(tab, tab[1:])):
                raise ValueError("ramp must be nondecreasing")
            object.__setattr__(self, "table", tab)

    def __call__(self, n: int) -> int:
        if n < 1:
            raise ValueError("ramp is defined on positive integers")
        if self.kind == "identity":
            return n
        if self.kind == "affine":
            return self.rate * (n + 1)
        if n > len(self.table):
            raise ValueError(f"table ramp has no value at {n}")
        return self.table[n - 1]

    def inverse(self, value: int) -> int:
        """Smallest ``i`` with ``ramp(i) >= |value|``."""
        target = abs(value)
        i = 1
        while self(i) < target:
            i += 1
        return i


@dataclass(frozen=True)
class LadderChain:
    """Truncated birth-and-reset chain on sites ``-j_minus..j_plus``.

    From a nonpositive site the walk steps up deterministically; from a
    positive site ``i`` it steps up with probability ``gamma`` and resets to
    ``-ramp(i)`` otherwise. Up-steps that would leave the window are
    reflected into the top site, and ``tail_mass_bound`` certifies how much
    stationary mass sits in the outermost states affected by that surgery.
    """

    gamma: float
    ramp: Ramp
    j_minus: int
    j_plus: int
    chain: FiniteMarkovChain
    state_values: np.ndarray
    tail_mass_bound: float

    def __post_init__(self):
        object.__setattr__(
            self, "state_values", _frozen_array(self.state_values, dtype=np.int64)
        )

    @property
    def alphabet(self) -> Alphabet:
        return self.chain.alphabet

    @property
    def stationary(self) -> np.ndarray:
        return self.chain.stationary

    def state_index(self, site: int) -> int:
        if site < -self.j_minus or site > self.j_plus:
            raise ValueError(f"site {site} outside truncation")
        return site + self.j_minus

    @property
    def model_id(self) -> str:
        return _model_id(self)


@dataclass(frozen=True)
class SamplePath:
    """Finite realization of a model, reproducible from (model, seed, length)."""

    symbols: np.ndarray
    model_id: str
    seed: int
    length: int

    def __post_init__(self):
        symbols = _frozen_array(self.symbols, dtype=np.int64)
        if symbols.shape != (self.length,):
            raise ValueError("length does not match symbol count")
        object.__setattr__(self, "symbols", symbols)


Model = FiniteMarkovChain | FunctionMarkovModel | LadderChain


def _require_stochastic(P: np.ndarray) -> None:
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise NonStochastic("transition matrix must be square")
    if np.any(P < 0) or np.any(P > 1):
        raise NonStochastic("transition entries must lie in [0, 1]")
    row_err = np.max(np.abs(P.sum(axis=1) - 1.0))
    if row_err > ROW_SUM_TOL:
        raise NonStochastic(f"row sums deviate from 1 by {row_err:.3e}")


def stationary_distribution(transitions) -> np.ndarray:
    """Solve ``pi P = pi``, ``sum(pi) = 1`` by direct elimination.

    A rank test rejects chains with more than one stationary distribution.
    The balance equations are then solved by GTH elimination, which uses no
    subtractions and therefore keeps entrywise relative accuracy even when
    stationary entries span many orders of magnitude; periodic chains, where
    power iteration fails, are handled exactly.
    """
    P = np.asarray(transitions, dtype=float)
    _require_stochastic(P)
    n = P.shape[0]
    if np.linalg.matrix_rank(P.T - np.eye(n)) < n - 1:
        raise NonUniqueStationary("chain has multiple stationary distributions")
    A = P.copy()
    m = n
    for k in range(n - 1):
        scale = A[k, k + 1 : n].sum()
        if scale <= 0.0:
            # The unique recurrent class sits inside {0..k}; states beyond
            # carry no stationary mass.
            m = k + 1
            break
        A[k + 1 : n, k] /= scale
        A[k + 1 : n, k + 1 : n] += np.outer(A[k + 1 : n, k], A[k, k + 1 : n])
    pi = np.zeros(n)
    pi[m - 1] = 1.0
    for k in range(m - 2, -1, -1):
        pi[k] = pi[k + 1 : m] @ A[k + 1 : m, k]
    return pi / pi.sum()


def _validate_word(word, size: int) -> np.ndarray:
    w = np.asarray(word, dtype=np.int64)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("word must be a non-empty symbol sequence")
    if np.any(w < 0) or np.any(w >= size):
        raise SymbolOutOfRange(f"symbol outside alphabet of size {size}")
    return w


def _markov_log_prob(pi: np.ndarray, P: np.ndarray, w: np.ndarray) -> float:
    p0 = pi[w[0]]
    if p0 == 0.0:
        return -math.inf
    steps = P[w[:-1], w[1:]]
    if np.any(steps == 0.0):
        return -math.inf
    return float(math.log(p0) + np.log(steps).sum())


def _transfer_log_prob(model: FunctionMarkovModel, w: np.ndarray) -> float:
    # Renormalize after every step so long words do not underflow.
    v = model.hidden.stationary
    log_acc = 0.0
    for sym in w:
        v = v @ model.transfer[sym]
        s = v.sum()
        if s <= 0.0:
            return -math.inf
        log_acc += math.log(s)
        v = v / s
    return log_acc


def marginal_log_prob(model: Model, word) -> float:
    """Log probability in nats of observing ``word`` as the first symbols.

    Returns ``-inf`` exactly when the word has probability zero.
    """
    if isinstance(model, LadderChain):
        model = model.chain
    w = _validate_word(word, model.alphabet.size)
    if isinstance(model, FiniteMarkovChain):
        return _markov_log_prob(model.stationary, model.transitions, w)
    return _transfer_log_prob(model, w)


def entropy_rate(chain: FiniteMarkovChain) -> float:
    """Entropy in nats per symbol, with the convention ``0 log 0 = 0``."""
    return cross_entropy_rate(chain, chain)


def cross_entropy_rate(chain_x: FiniteMarkovChain, chain_y: FiniteMarkovChain) -> float:
    """Limiting per-symbol cost of coding samples of ``chain_x`` under ``chain_y``.

    Returns ``+inf`` when some transition used by ``chain_x`` is forbidden
    under ``chain_y``. Equals ``entropy_rate(chain_x)`` when the chains
    coincide.
    """
    if chain_x.alphabet.size != chain_y.alphabet.size:
        raise AlphabetMismatch("chains must share an alphabet")
    weights = chain_x.stationary[:, None] * chain_x.transitions
    used = weights > 0.0
    PY = chain_y.transitions
    if np.any(used & (PY == 0.0)):
        return math.inf
    out = 0.0
    for a, b in zip(*np.nonzero(used)):
        out -= weights[a, b] * math.log(PY[a, b])
    return out


def _alphabet_size(model: Model) -> int:
    return model.alphabet.size


def _forward_start(model: Model):
    """Incremental word-probability state; ``None`` marks a dead branch."""
    if isinstance(model, LadderChain):
        model = model.chain
    if isinstance(model, FiniteMarkovChain):
        return (model, -1, 0.0)
    return (model, model.hidden.stationary, 0.0)


def _forward_step(state, symbol: int):
    if state is None:
        return None
    model, carry, log_acc = state
    if isinstance(model, FiniteMarkovChain):
        p = model.stationary[symbol] if carry < 0 else model.transitions[carry, symbol]
        if p == 0.0:
            return None
        return (model, symbol, log_acc + math.log(p))
    v = carry @ model.transfer[symbol]
    s = v.sum()
    if s <= 0.0:
        return None
    return (model, v / s, log_acc + math.log(s))


def _forward_log_prob(state) -> float:
    return -math.inf if state is None else state[2]


def partial_cross_entropy(
    model_x: Model, model_y: Model, n: int, budget: int = 2_000_000
) -> float:
    """Finite-``n`` cross entropy per symbol by exhaustive word enumeration.

    Averages ``-log P_y(word)`` over all length-``n`` words weighted by their
    probability under ``model_x``; returns ``+inf`` if any word possible
    under ``model_x`` is impossible under ``model_y``.
    """
    if n < 1:
        raise ValueError("word length must be positive")
    size = _alphabet_size(model_x)
    if size != _alphabet_size(model_y):
        raise AlphabetMismatch("models must share an alphabet")
    if size**n > budget:
        raise BudgetExceeded(f"{size}^{n} words exceed budget {budget}")

    def visit(depth, state_x, state_y):
        if depth == n:
            log_px = _forward_log_prob(state_x)
            log_py = _forward_log_prob(state_y)
            if log_py == -math.inf:
                return math.inf
            return -math.exp(log_px) * log_py
        total = 0.0
        for sym in range(size):
            nxt_x = _forward_step(state_x, sym)
            if nxt_x is None:
                continue
            total += visit(depth + 1, nxt_x, _forward_step(state_y, sym))
            if total == math.inf:
                return math.inf
        return total

    return visit(0, _forward_start(model_x), _forward_start(model_y)) / n


def enumerate_positive_words(model: Model, n: int, budget: int = 2_000_000):
    """Yield ``(word, log_prob)`` for every positive-probability length-``n`` word."""
    size = _alphabet_size(model)
    if size**n > budget:
        raise BudgetExceeded(f"{size}^{n} words exceed budget {budget}")
    word = [0] * n

    def visit(depth, state):
        if depth == n:
            yield tuple(word), _forward_log_prob(state)
            return
        for sym in range(size):
            nxt = _forward_step(state, sym)
            if nxt is None:
                continue
            word[depth] = sym
            yield from visit(depth + 1, nxt)

    yield from visit(0, _forward_start(model))


def sample_path(model: Model, length: int, seed: int) -> SamplePath:
    """Draw a stationary sample of ``length`` symbols, deterministic in ``seed``."""
    if length < 1:
        raise ValueError("length must be at least 1")
    gen = make_generator(seed)
    if isinstance(model, FiniteMarkovChain):
        symbols = _markov_states(model, length, gen)
    elif isinstance(model, FunctionMarkovModel):
        hidden = _markov_states(model.hidden, length, gen)
        symbols = model.observation_map[hidden]
    else:
        symbols = _markov_states(model.chain, length, gen)
        top = model.state_index(model.j_plus)
        if np.any(symbols == top):
            raise TruncationBreach(
                "walk reached the truncation boundary; enlarge the window"
            )
    return SamplePath(symbols, _model_id(model), seed, length)


def _markov_states(chain: FiniteMarkovChain, length: int, gen) -> np.ndarray:
    init_cdf = np.cumsum(chain.stationary)
    row_cdf = np.cumsum(chain.transitions, axis=1)
    u = gen.random(length)
    return _kernels.markov_sample(init_cdf, row_cdf, u)


def build_ladder_chain(
    gamma: float,
    ramp: Ramp | None = None,
    j_plus: int = 40,
    j_minus: int | None = None,
    tail_tolerance: float = 1e-8,
) -> LadderChain:
    """Assemble the truncated ladder chain and certify the truncation.

    The window must cover ``[-ramp(j_plus), j_plus]``; up-moves out of the
    top are reflected into the top site. Raises ``TruncationTooSmall`` when
    the stationary mass in the outermost tenth of states on either end
    exceeds ``tail_tolerance``.
    """
    if not 0.0 < gamma < 0.5:
        raise ValueError("gamma must lie in (0, 1/2)")
    if ramp is None:
        ramp = Ramp("identity")
    if j_plus < 1:
        raise ValueError("j_plus must be at least 1")
    reach = max(ramp(i) for i in range(1, j_plus + 1))
    if j_minus is None:
        j_minus = reach
    if j_minus < reach:
        raise ValueError(f"truncation must cover resets down to -{reach}")

    size = j_minus + j_plus + 1
    idx = lambda j: j + j_minus
    P = np.zeros((size, size))
    for j in range(-j_minus, j_plus + 1):
        if j <= 0:
            P[idx(j), idx(j + 1)] = 1.0
        else:
            up = idx(j + 1) if j + 1 <= j_plus else idx(j_plus)
            P[idx(j), up] += gamma
            P[idx(j), idx(-ramp(j))] += 1.0 - gamma
    pi = stationary_distribution(P)

    top_edge = math.ceil(0.9 * j_plus)
    bottom_edge = math.ceil(0.9 * j_minus)
    tail = float(
        pi[idx(top_edge) : idx(j_plus) + 1].sum() + pi[: idx(-bottom_edge) + 1].sum()
    )
    if tail > tail_tolerance:
        raise TruncationTooSmall(
            f"outer-state stationary mass {tail:.3e} exceeds {tail_tolerance:.3e}"
        )

    # Positive sites should decay geometrically at rate gamma (up to a
    # bounded offset); a gross violation means the solve went wrong.
    log_gamma = math.log(gamma)
    offsets = [math.log(pi[idx(j)]) / log_gamma - j for j in range(1, j_plus)]
    if offsets and (max(offsets) - min(offsets)) > 1.0:
        raise ValueError("stationary vector inconsistent with geometric decay")

    labels = [str(j) for j in range(-j_minus, j_plus + 1)]
    chain = FiniteMarkovChain(Alphabet(size, labels), P, pi)
    values = np.arange(-j_minus, j_plus + 1, dtype=np.int64)
    return LadderChain(gamma, ramp, j_minus, j_plus, chain, values, tail)


def lump(hidden: FiniteMarkovChain | LadderChain, observation_map) -> FunctionMarkovModel:
    """Observe a chain through a symbol map, building its transfer matrices."""
    chain = hidden.chain if isinstance(hidden, LadderChain) else hidden
    obs_map = np.asarray(observation_map, dtype=np.int64)
    nz = chain.alphabet.size
    if obs_map.shape != (nz,):
        raise ValueError("observation map must assign every hidden symbol")
    if np.any(obs_map < 0):
        raise ValueError("observed symbols must be nonnegative")
    n_obs = int(obs_map.max()) + 1
    if set(np.unique(obs_map)) != set(range(n_obs)):
        raise NotSurjective("observation map must hit every observed symbol")
    transfer = np.zeros((n_obs, nz, nz))
    for a in range(n_obs):
        cols = obs_map == a
        transfer[a][:, cols] = chain.transitions[:, cols]
    return FunctionMarkovModel(chain, obs_map, Alphabet(n_obs), transfer)


def _model_id(model: Model) -> str:
    doc = json.dumps(model_to_json(model), sort_keys=True)
    digest = hashlib.sha1(doc.encode()).hexdigest()[:10]
    kind = {
        FiniteMarkovChain: "markov",
        FunctionMarkovModel: "function_markov",
        LadderChain: "ladder",
    }[type(model)]
    return f"{kind}-{digest}"


def model_to_json(model: Model) -> dict:
    """Serializable description, the inverse of ``model_from_json``."""
    if isinstance(model, FiniteMarkovChain):
        doc = {
            "type": "markov",
            "alphabet": {"size": model.alphabet.size},
            "transitions": model.transitions.tolist(),
        }
        if model.alphabet.labels is not None:
            doc["alphabet"]["labels"] = list(model.alphabet.labels)
        return doc
    if isinstance(model, FunctionMarkovModel):
        return {
            "type": "function_markov",
            "hidden": model_to_json(model.hidden),
            "map": model.observation_map.tolist(),
        }
    ramp_doc = {"kind": model.ramp.kind}
    if model.ramp.kind == "affine":
        ramp_doc["rate"] = model.ramp.rate
    if model.ramp.kind == "table":
        ramp_doc["values"] = list(model.ramp.table)
    return {
        "type": "ladder",
        "gamma": model.gamma,
        "ramp": ramp_doc,
        "truncation": {"j_minus": model.j_minus, "j_plus": model.j_plus},
    }


def model_from_json(doc: dict) -> Model:
    """Validate and build a model from its JSON description."""
    kind = doc.get("type")
    if kind == "markov":
        labels = doc.get("alphabet", {}).get("labels")
        return FiniteMarkovChain.from_transitions(doc["transitions"], labels)
    if kind == "function_markov":
        hidden = model_from_json(doc["hidden"])
        if isinstance(hidden, FunctionMarkovModel):
            raise ValueError("hidden model must be a Markov or ladder chain")
        return lump(hidden, doc["map"])
    if kind == "ladder":
        ramp_doc = doc.get("ramp", {"kind": "identity"})
        ramp = Ramp(
            ramp_doc.get("kind", "identity"),
            rate=ramp_doc.get("rate", 1),
            table=ramp_doc.get("values"),
        )
        trunc = doc.get("truncation", {})
        return build_ladder_chain(
            doc["gamma"],
            ramp,
            j_plus=trunc.get("j_plus", 40),
            j_minus=trunc.get("j_minus"),
            tail_tolerance=doc.get("tail_tolerance", 1e-8),
        )
    raise ValueError(f"unknown model type {kind!r}")


def load_model(path) -> Model:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_json(json.load(fh))


def save_model(model: Model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_json(model), fh, indent=2)
        fh.write("\n")
