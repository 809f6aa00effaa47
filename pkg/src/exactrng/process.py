"""Finite-alphabet process models with exact conditional laws.

Public functions take and return symbols numbered ``1..alphabet_size``.  The
model classes themselves work with 0-based symbol indices and an opaque,
hashable *memory state* so that the generator, the analyzers and the sampler
can walk a process one symbol at a time without re-reading the prefix::

    st = model.initial_state()
    p = model.pmf(st)          # tuple of exact probabilities, 0-based
    st = model.step(st, k)     # condition on symbol index k
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from typing import Any, Iterator, Sequence

from .exactnum import (
    ONE,
    ZERO,
    DyadicComplement,
    DyadicExp,
    Real,
    check_pmf,
    format_ratio,
    ratio,
)


class ConfigError(ValueError):
    """A process description is malformed; ``field`` names the offending entry."""

    def __init__(self, field: str, msg: str):
        super().__init__(f"{field}: {msg}" if field else msg)
        self.field = field
        self.msg = msg


class NullEventError(ValueError):
    pass


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def _int_cum(pmf: Sequence[Fraction]) -> tuple[tuple[int, ...], int]:
    """Cumulative numerators over a common denominator: ``(c_0=0, ..., c_M=d), d``."""
    d = reduce(_lcm, (p.denominator for p in pmf), 1)
    cums = [0]
    for p in pmf:
        cums.append(cums[-1] + p.numerator * (d // p.denominator))
    return tuple(cums), d


class ProcessSpec:
    """Base class.  Subclasses are frozen dataclasses."""

    alphabet_size: int
    rational = True

    def initial_state(self):
        raise NotImplementedError

    def pmf(self, state) -> tuple:
        raise NotImplementedError

    def step(self, state, k: int):
        raise NotImplementedError

    def int_pmf(self, state) -> tuple[tuple[int, ...], int]:
        """Integer cumulative form of :meth:`pmf` for the hot loops."""
        return _int_cum(self.pmf(state))

    def max_conditional(self) -> Fraction:
        """Upper bound on every conditional probability the process can produce."""
        raise NotImplementedError

    @property
    def independent(self) -> bool:
        return False


@dataclass(frozen=True)
class IID(ProcessSpec):
    probs: tuple

    def __post_init__(self):
        object.__setattr__(self, "probs", check_pmf(self.probs))

    @property
    def alphabet_size(self):
        return len(self.probs)

    @property
    def independent(self):
        return True

    def initial_state(self):
        return None

    def pmf(self, state):
        return self.probs

    def step(self, state, k):
        return None

    @cached_property
    def _cum(self):
        return _int_cum(self.probs)

    def int_pmf(self, state):
        return self._cum

    def max_conditional(self):
        return max(self.probs)


@dataclass(frozen=True)
class Markov(ProcessSpec):
    """First-order chain; ``transition[a][b]`` is ``P(next = b | current = a)``."""

    transition: tuple
    initial: tuple

    def __post_init__(self):
        rows = tuple(check_pmf(r, f"transition[{i}]") for i, r in enumerate(self.transition))
        init = check_pmf(self.initial, "initial")
        if any(len(r) != len(rows) for r in rows):
            raise ValueError("transition matrix is not square")
        if len(init) != len(rows):
            raise ValueError("initial distribution length does not match transition matrix")
        object.__setattr__(self, "transition", rows)
        object.__setattr__(self, "initial", init)

    @property
    def alphabet_size(self):
        return len(self.initial)

    def initial_state(self):
        return None

    def pmf(self, state):
        return self.initial if state is None else self.transition[state]

    def step(self, state, k):
        return k

    @cached_property
    def _cums(self):
        return [_int_cum(r) for r in self.transition], _int_cum(self.initial)

    def int_pmf(self, state):
        rows, init = self._cums
        return init if state is None else rows[state]

    def reachable_states(self) -> set[int]:
        seen = {k for k, p in enumerate(self.initial) if p > 0}
        todo = list(seen)
        while todo:
            a = todo.pop()
            for b, p in enumerate(self.transition[a]):
                if p > 0 and b not in seen:
                    seen.add(b)
                    todo.append(b)
        return seen

    def max_conditional(self):
        live = self.reachable_states()
        return max([max(self.initial)] + [max(self.transition[a]) for a in live])


@dataclass(frozen=True)
class FiniteMixture(ProcessSpec):
    """``P(seq) = sum_k weights[k] * components[k].P(seq)``.

    The memory state carries, per component, the joint mass
    ``weights[k] * P_k(prefix)`` and the component's own state, which makes the
    posterior (and hence the next-symbol law) exact.
    """

    weights: tuple
    components: tuple

    def __post_init__(self):
        w = check_pmf(self.weights, "weights")
        comps = tuple(self.components)
        if len(w) != len(comps):
            raise ValueError("weights and components differ in length")
        sizes = {c.alphabet_size for c in comps}
        if len(sizes) != 1:
            raise ValueError("mixture components must share one alphabet")
        if not all(c.rational for c in comps):
            raise ValueError("mixture components must have rational conditionals")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)

    @property
    def alphabet_size(self):
        return self.components[0].alphabet_size

    def initial_state(self):
        return tuple((w, c.initial_state()) for w, c in zip(self.weights, self.components))

    def pmf(self, state):
        total = sum((a for a, _ in state), ZERO)
        if total == 0:
            raise NullEventError("conditioning on null event")
        out = [ZERO] * self.alphabet_size
        for (a, s), comp in zip(state, self.components):
            if a:
                for k, p in enumerate(comp.pmf(s)):
                    out[k] += a * p
        return tuple(x / total for x in out)

    def step(self, state, k):
        return tuple(
            (a * comp.pmf(s)[k], comp.step(s, k)) if a else (ZERO, s)
            for (a, s), comp in zip(state, self.components)
        )

    def max_conditional(self):
        # a posterior average of values <= p is <= p
        return max(c.max_conditional() for c in self.components)

    @staticmethod
    def joint(state) -> Fraction:
        return sum((a for a, _ in state), ZERO)


FAMILIES = ("harmonic", "quadratic")


@dataclass(frozen=True)
class NamedBernoulli(ProcessSpec):
    """Independent, non-stationary binary coin with ``P(X_i = 1) = 2**(-1/i)``
    (``harmonic``) or ``2**(-1/i**2)`` (``quadratic``).  State = symbols seen."""

    family: str

    rational = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")

    @property
    def alphabet_size(self):
        return 2

    @property
    def independent(self):
        return True

    def exponent(self, i: int) -> Fraction:
        """Min-entropy of the ``i``-th toss (1-based), in bits."""
        return Fraction(1, i) if self.family == "harmonic" else Fraction(1, i * i)

    def initial_state(self):
        return 0

    def pmf(self, state):
        head = DyadicExp(self.exponent(state + 1))
        return (head, DyadicComplement(head))

    def step(self, state, k):
        return state + 1

    def int_pmf(self, state):
        raise ValueError("exact analysis requires rational conditionals")

    def max_conditional(self):
        # P(X_i = 1) -> 1
        return ONE


# --------------------------------------------------------------------------
# module-level operations (1-based symbols)


def _walk(model: ProcessSpec, prefix: Sequence[int]):
    st = model.initial_state()
    M = model.alphabet_size
    for pos, x in enumerate(prefix):
        if not 1 <= x <= M:
            raise ValueError(f"symbol {x} at position {pos} outside 1..{M}")
        p = model.pmf(st)[x - 1]
        if isinstance(p, Fraction) and p == 0:
            raise NullEventError("conditioning on null event")
        st = model.step(st, x - 1)
    return st


def cond_pmf(model: ProcessSpec, prefix: Sequence[int] = ()) -> tuple:
    """Exact law of the next symbol given ``prefix`` (index ``k`` is symbol ``k+1``)."""
    return model.pmf(_walk(model, prefix))


def seq_prob(model: ProcessSpec, seq: Sequence[int]):
    """Exact ``P(X^m = seq)``.

    For the named Bernoulli families only the all-ones sequences have a closed
    form (a :class:`DyadicExp`); anything else raises.
    """
    if not model.rational:
        if all(x == 1 for x in seq):
            return DyadicExp(sum((model.exponent(i) for i in range(1, len(seq) + 1)), ZERO))
        raise ValueError("exact analysis requires rational conditionals")
    st = model.initial_state()
    p = ONE
    M = model.alphabet_size
    for x in seq:
        if not 1 <= x <= M:
            raise ValueError(f"symbol {x} outside 1..{M}")
        p *= model.pmf(st)[x - 1]
        if p == 0:
            return ZERO
        st = model.step(st, x - 1)
    return p


def min_entropy(model: ProcessSpec, m: int):
    """``H_min(X^m)`` in bits for a process independent across time.

    Exact Fraction for the named families and for i.i.d. laws whose largest
    mass is a power of two; a :class:`Real` otherwise.
    """
    if not model.independent:
        raise ValueError("min-entropy additivity unavailable for processes with memory")
    if isinstance(model, NamedBernoulli):
        return sum((model.exponent(i) for i in range(1, m + 1)), ZERO)
    top = max(model.probs)
    if top.numerator == 1 and top.denominator & (top.denominator - 1) == 0:
        return Fraction(m * (top.denominator.bit_length() - 1))
    v = -m * math.log2(top)
    return Real(v, 4 * math.ulp(v) * max(1, m))


def sequence_law(model: ProcessSpec, n: int) -> dict[tuple[int, ...], Fraction]:
    """Exact ``P_{X^n}`` as a dict over all ``alphabet_size**n`` sequences."""
    if not model.rational:
        raise ValueError("exact analysis requires rational conditionals")
    out = {}
    M = model.alphabet_size

    def rec(prefix, st, p):
        if len(prefix) == n:
            out[prefix] = p
            return
        pmf = model.pmf(st) if p else (ZERO,) * M
        for k in range(M):
            q = p * pmf[k]
            rec(prefix + (k + 1,), model.step(st, k) if q else st, q)

    rec((), model.initial_state(), ONE)
    return out


def iter_spectra(model: ProcessSpec, max_len: int, budget: int = 1 << 20) -> Iterator[dict[Fraction, Fraction]]:
    """Yield, for lengths ``0..max_len``, the law of ``P(X^m)`` as ``{prob: mass}``.

    Continuations are aggregated by ``(memory state, running probability)``:
    two prefixes that agree on both have identical futures, so only their
    multiplicity matters.
    """
    if not model.rational:
        raise ValueError("exact analysis requires rational conditionals")
    level: dict[tuple, int] = {(model.initial_state(), ONE): 1}
    for m in range(max_len + 1):
        spec: dict[Fraction, Fraction] = {}
        for (_, p), cnt in level.items():
            spec[p] = spec.get(p, ZERO) + p * cnt
        yield spec
        if m == max_len:
            return
        nxt: dict[tuple, int] = {}
        for (st, p), cnt in level.items():
            pmf = model.pmf(st)
            for k, q in enumerate(pmf):
                if q == 0:
                    continue
                key = (model.step(st, k), p * q)
                nxt[key] = nxt.get(key, 0) + cnt
        if len(nxt) > budget:
            raise RuntimeError("spectrum enumeration budget exceeded")
        level = nxt


# --------------------------------------------------------------------------
# JSON config documents


def model_from_dict(doc: Any, where: str = "") -> ProcessSpec:
    def fld(name):
        return f"{where}.{name}" if where else name

    if not isinstance(doc, dict):
        raise ConfigError(where or "<root>", "expected a JSON object")
    kind = doc.get("kind")
    if kind is None:
        raise ConfigError(fld("kind"), "missing")

    def vec(name, value=None):
        v = doc.get(name) if value is None else value
        if not isinstance(v, list) or not v:
            raise ConfigError(fld(name), "expected a non-empty list of rationals")
        out = []
        for i, x in enumerate(v):
            try:
                out.append(ratio(x))
            except (TypeError, ValueError) as e:
                raise ConfigError(f"{fld(name)}[{i}]", str(e)) from None
        return out

    try:
        if kind == "iid":
            return IID(tuple(vec("pmf")))
        if kind == "markov":
            rows = doc.get("transition")
            if not isinstance(rows, list) or not rows:
                raise ConfigError(fld("transition"), "expected a non-empty matrix")
            mat = []
            for i, r in enumerate(rows):
                if not isinstance(r, list):
                    raise ConfigError(f"{fld('transition')}[{i}]", "expected a list")
                mat.append(tuple(vec(f"transition[{i}]", r)))
            return Markov(tuple(mat), tuple(vec("initial")))
        if kind == "mixture":
            comps = doc.get("components")
            if not isinstance(comps, list) or not comps:
                raise ConfigError(fld("components"), "expected a non-empty list")
            parts = tuple(model_from_dict(c, f"{fld('components')}[{i}]") for i, c in enumerate(comps))
            return FiniteMixture(tuple(vec("weights")), parts)
        if kind == "named":
            fam = doc.get("family")
            if fam not in FAMILIES:
                raise ConfigError(fld("family"), f"expected one of {list(FAMILIES)}")
            return NamedBernoulli(fam)
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(where or "<root>", str(e)) from None
    raise ConfigError(fld("kind"), f"unknown kind {kind!r}")


def model_to_dict(model: ProcessSpec) -> dict:
    if isinstance(model, IID):
        return {"kind": "iid", "pmf": [format_ratio(p) for p in model.probs]}
    if isinstance(model, Markov):
        return {
            "kind": "markov",
            "transition": [[format_ratio(p) for p in r] for r in model.transition],
            "initial": [format_ratio(p) for p in model.initial],
        }
    if isinstance(model, FiniteMixture):
        return {
            "kind": "mixture",
            "weights": [format_ratio(w) for w in model.weights],
            "components": [model_to_dict(c) for c in model.components],
        }
    if isinstance(model, NamedBernoulli):
        return {"kind": "named", "family": model.family}
    raise TypeError(type(model).__name__)


def load_model(path) -> ProcessSpec:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}:{e.lineno}:{e.colno}", e.msg) from None
    try:
        return model_from_dict(doc)
    except ConfigError as e:
        raise ConfigError(f"{path}: {e.field}", e.msg) from None
