"""Markov chain specs over a free group, with exact rational arithmetic.

A spec holds a finite alphabet, a fully supported stationary distribution pi
and one row-stochastic kernel per generator, each stationary for pi.  Via the
tree product formula these data determine a unique shift-invariant measure on
A^F whose cylinder probabilities this module evaluates exactly.

Symbols are addressed by their index in the alphabet everywhere below;
configurations map group elements (Word) to symbol indices.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    BudgetError,
    DomainError,
    InputError,
    MissingCoordinate,
    SpecInvalidError,
)
from .words import (
    IDENTITY,
    LeftConnectedSet,
    Letter,
    Word,
    ball,
    edge_letter,
    multiply,
    parent,
    word_to_str,
)

Matrix = tuple[tuple[Fraction, ...], ...]

ZERO = Fraction(0)
ONE = Fraction(1)


# ---------------------------------------------------------------------------
# rational parsing: file entries are lowest-terms "p/q" (or integer) strings
# ---------------------------------------------------------------------------

_FRAC = re.compile(r"^(0|[1-9][0-9]*)(?:/([1-9][0-9]*))?$")


def frac_from_str(text: str) -> Fraction:
    """Parse a nonnegative lowest-terms rational; reject anything else."""
    if not isinstance(text, str):
        raise InputError(f"rational must be a string, got {text!r}")
    m = _FRAC.match(text)
    if not m:
        raise InputError(f"bad rational {text!r} (need lowest-terms nonnegative p/q)")
    p = int(m.group(1))
    q = int(m.group(2)) if m.group(2) else 1
    f = Fraction(p, q)
    if f.numerator != p or f.denominator != q:
        raise InputError(f"rational {text!r} is not in lowest terms")
    return f


def frac_to_str(f: Fraction) -> str:
    return str(f)


# ---------------------------------------------------------------------------
# the spec itself
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MarkovSpec:
    generators: tuple[str, ...]
    alphabet: tuple
    pi: tuple[Fraction, ...]
    kernels: tuple[Matrix, ...]  # kernels[gen][a][b], indexed by alphabet position

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def size(self) -> int:
        return len(self.alphabet)

    def symbol_index(self, symbol) -> int:
        try:
            return self.alphabet.index(symbol)
        except ValueError:
            raise InputError(f"symbol {symbol!r} not in alphabet") from None

    def generator_index(self, name: str) -> int:
        try:
            return self.generators.index(name)
        except ValueError:
            raise InputError(f"unknown generator {name!r}") from None

    def with_kernel(self, gen: int, kernel: Matrix) -> "MarkovSpec":
        ks = list(self.kernels)
        ks[gen] = kernel
        return MarkovSpec(self.generators, self.alphabet, self.pi, tuple(ks))


def make_spec(generators, alphabet, pi, kernels) -> MarkovSpec:
    """Normalize plain containers into a MarkovSpec (no validation)."""
    return MarkovSpec(
        tuple(generators),
        tuple(alphabet),
        tuple(Fraction(x) for x in pi),
        tuple(tuple(tuple(Fraction(x) for x in row) for row in k) for k in kernels),
    )


@dataclass(frozen=True)
class ValidationReport:
    problems: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.problems


def validate(spec: MarkovSpec) -> ValidationReport:
    """Check full support, normalization, row-stochasticity and stationarity."""
    problems = []
    n = spec.size
    if spec.rank < 2:
        problems.append(f"rank {spec.rank} < 2: need a non-abelian free group")
    if len(set(spec.alphabet)) != n or n == 0:
        problems.append("alphabet empty or has duplicate symbols")
    if len(spec.pi) != n:
        problems.append("pi length does not match alphabet")
        return ValidationReport(tuple(problems))
    for a, p in enumerate(spec.pi):
        if p <= 0:
            problems.append(f"pi({spec.alphabet[a]!r}) = {p} is not positive")
    if sum(spec.pi) != 1:
        problems.append(f"pi sums to {sum(spec.pi)}, not 1")
    if len(spec.kernels) != spec.rank:
        problems.append("kernel count does not match generator count")
        return ValidationReport(tuple(problems))
    for gi, k in enumerate(spec.kernels):
        name = spec.generators[gi]
        if len(k) != n or any(len(row) != n for row in k):
            problems.append(f"kernel {name} is not {n}x{n}")
            continue
        for a, row in enumerate(k):
            if any(x < 0 for x in row):
                problems.append(f"kernel {name} row {spec.alphabet[a]!r} has a negative entry")
            if sum(row) != 1:
                problems.append(
                    f"kernel {name} row {spec.alphabet[a]!r} sums to {sum(row)}, not 1"
                )
        for b in range(n):
            mass = sum(spec.pi[a] * k[a][b] for a in range(n))
            if mass != spec.pi[b]:
                problems.append(f"pi is not stationary for kernel {name} at column {spec.alphabet[b]!r}")
                break
    return ValidationReport(tuple(problems))


def require_valid(spec: MarkovSpec) -> MarkovSpec:
    report = validate(spec)
    if not report.ok:
        raise SpecInvalidError(report.problems)
    return spec


@lru_cache(maxsize=None)
def reverse_kernel(spec: MarkovSpec, gen: int) -> Matrix:
    """The kernel of the stationary chain run backwards in the given direction.

    Entrywise P_rev(a, b) = pi(b) P(b, a) / pi(a); stationarity of pi makes
    the rows sum to 1, and reversing twice gives back P.
    """
    k = spec.kernels[gen]
    n = spec.size
    return tuple(
        tuple(spec.pi[b] * k[b][a] / spec.pi[a] for b in range(n)) for a in range(n)
    )


def kernel_for_letter(spec: MarkovSpec, letter: Letter) -> Matrix:
    """Transition kernel along a tree edge labelled by the given letter."""
    if not 0 <= letter.gen < spec.rank:
        raise InputError(f"letter {letter.name} outside rank {spec.rank}")
    if letter.sign > 0:
        return spec.kernels[letter.gen]
    return reverse_kernel(spec, letter.gen)


# ---------------------------------------------------------------------------
# configurations and cylinder measures
# ---------------------------------------------------------------------------


class Configuration:
    """A partial assignment of symbols to a left-connected domain containing e."""

    __slots__ = ("domain", "_values")

    def __init__(self, assignment: Mapping[Word, int]):
        domain = LeftConnectedSet(assignment.keys())  # validates the domain
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "_values", dict(assignment))

    def __setattr__(self, *a):
        raise AttributeError("Configuration is immutable")

    def __getitem__(self, w: Word) -> int:
        try:
            return self._values[w]
        except KeyError:
            raise MissingCoordinate(w) from None

    def get(self, w: Word, default=None):
        return self._values.get(w, default)

    def __contains__(self, w: Word) -> bool:
        return w in self._values

    def __len__(self) -> int:
        return len(self._values)

    def __iter__(self) -> Iterator[Word]:
        return iter(self.domain)

    def items(self):
        for w in self.domain:
            yield w, self._values[w]

    def __eq__(self, other) -> bool:
        return isinstance(other, Configuration) and self._values == other._values

    def __hash__(self) -> int:
        return hash(tuple(self.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{w}:{v}" for w, v in self.items())
        return f"Configuration({{{body}}})"


def translate_configuration(phi: Configuration, h: Word) -> Configuration:
    """The configuration psi on (domain)h^-1 with psi(d h^-1) = phi(d).

    For h in the domain the new domain again contains the identity and stays
    left-connected, so shift invariance of cylinder measures can be tested.
    """
    hinv = ~h
    return Configuration({multiply(d, hinv): v for d, v in phi.items()})


def cylinder_measure(spec: MarkovSpec, phi: Configuration) -> Fraction:
    """Exact measure of the cylinder {x : x_g = phi(g) on the domain}.

    The domain is swept parents-first; each element beyond the identity
    contributes one kernel factor along its tree edge, using the reversed
    kernel when the edge letter is an inverse generator.
    """
    total = ONE
    for w in phi.domain:
        if w.is_identity:
            total *= spec.pi[phi[w]]
        else:
            k = kernel_for_letter(spec, edge_letter(w))
            total *= k[phi[parent(w)]][phi[w]]
        if total == 0:
            return ZERO
    return total


def enumerate_cylinders(
    spec: MarkovSpec, domain: LeftConnectedSet, positive_only: bool = True
) -> Iterator[tuple[tuple[int, ...], Fraction]]:
    """Yield (values, measure) for configurations on the domain, parents-first.

    Values follow the domain's canonical order.  With positive_only the
    depth-first sweep prunes zero-probability branches, so the yielded
    measures sum to exactly 1.
    """
    words = domain.words
    parent_pos = [0] * len(words)
    kernels: list[Matrix | None] = [None] * len(words)
    for i, w in enumerate(words):
        if i == 0:
            continue
        parent_pos[i] = words.index(parent(w))
        kernels[i] = kernel_for_letter(spec, edge_letter(w))
    n = spec.size
    values = [0] * len(words)

    def rec(i: int, weight: Fraction) -> Iterator[tuple[tuple[int, ...], Fraction]]:
        if i == len(words):
            yield tuple(values), weight
            return
        row = spec.pi if i == 0 else kernels[i][values[parent_pos[i]]]
        for b in range(n):
            f = row[b]
            if positive_only and f == 0:
                continue
            values[i] = b
            yield from rec(i + 1, weight * f)

    yield from rec(0, ONE)


# ---------------------------------------------------------------------------
# restrictions to generator directions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZKernel:
    """A stationary two-sided chain law: alphabet, marginal and kernel."""

    alphabet: tuple
    pi: tuple[Fraction, ...]
    transitions: Matrix

    @property
    def size(self) -> int:
        return len(self.alphabet)


def restriction(spec: MarkovSpec, gen: int) -> ZKernel:
    """The law of the symbol sequence read along one generator direction."""
    if not 0 <= gen < spec.rank:
        raise InputError(f"generator index {gen} out of range")
    return ZKernel(spec.alphabet, spec.pi, spec.kernels[gen])


def assemble(parts: Mapping[str, ZKernel]) -> MarkovSpec:
    """Rebuild a spec from one stationary chain per generator.

    All parts must share the alphabet and the marginal; the result restricts
    back to exactly the given chains.
    """
    names = sorted(parts.keys(), key=_generator_sort_key)
    if not names:
        raise InputError("no restriction chains given")
    first = parts[names[0]]
    for name in names:
        zk = parts[name]
        if zk.alphabet != first.alphabet:
            raise InputError(f"alphabet mismatch between {names[0]} and {name}")
        if zk.pi != first.pi:
            raise InputError(f"stationary distribution mismatch between {names[0]} and {name}")
    return MarkovSpec(
        tuple(names),
        first.alphabet,
        first.pi,
        tuple(parts[name].transitions for name in names),
    )


def _generator_sort_key(name: str) -> int:
    m = re.match(r"^s([1-9][0-9]*)$", name)
    if not m:
        raise InputError(f"generator names must be s1, s2, ...; got {name!r}")
    return int(m.group(1))


def bernoulli_spec(alphabet, pi: Sequence[Fraction], rank: int = 2) -> MarkovSpec:
    """The product measure with the given marginal: every kernel row equals pi."""
    pi = tuple(Fraction(x) for x in pi)
    if any(p <= 0 for p in pi) or sum(pi) != 1:
        raise InputError("pi must be a fully supported probability vector")
    row = tuple(pi)
    k: Matrix = tuple(row for _ in alphabet)
    return MarkovSpec(
        tuple(f"s{i + 1}" for i in range(rank)),
        tuple(alphabet),
        pi,
        tuple(k for _ in range(rank)),
    )


# ---------------------------------------------------------------------------
# sampling: splittable, keyed by (seed, word), order-independent
# ---------------------------------------------------------------------------

_UNIT_DEN = 1 << 64


class SampledTree:
    """A lazy configuration drawn from the spec, defined on the whole group.

    The value at g is a function of (seed, g) alone: the uniform variate used
    at g is derived by hashing the serialized word with a keyed blake2b, and
    the symbol is drawn from the kernel row of g's parent value.  Lookups
    therefore do not depend on evaluation order and never miss.
    """

    __slots__ = ("spec", "seed", "_memo")

    def __init__(self, spec: MarkovSpec, seed: int):
        self.spec = spec
        self.seed = int(seed)
        self._memo: dict[Word, int] = {}

    def _unit(self, w: Word) -> Fraction:
        key = self.seed.to_bytes(8, "big", signed=False)
        digest = hashlib.blake2b(word_to_str(w).encode(), key=key, digest_size=8).digest()
        return Fraction(int.from_bytes(digest, "big"), _UNIT_DEN)

    def __getitem__(self, w: Word) -> int:
        memo = self._memo
        if w in memo:
            return memo[w]
        # materialize the geodesic to the closest memoized ancestor
        chain = []
        v = w
        while v not in memo and not v.is_identity:
            chain.append(v)
            v = parent(v)
        if v.is_identity and v not in memo:
            memo[v] = _draw(self.spec.pi, self._unit(v))
        for g in reversed(chain):
            row = kernel_for_letter(self.spec, edge_letter(g))[memo[parent(g)]]
            memo[g] = _draw(row, self._unit(g))
        return memo[w]


def _draw(row: Sequence[Fraction], u: Fraction) -> int:
    acc = ZERO
    for b, p in enumerate(row):
        acc += p
        if u < acc:
            return b
    return len(row) - 1  # u == 1 cannot happen; guard for rounding-free exactness


def derive_seed(seed: int, index: int) -> int:
    digest = hashlib.blake2b(
        index.to_bytes(8, "big", signed=False),
        key=int(seed).to_bytes(8, "big", signed=False),
        digest_size=8,
    ).digest()
    return int.from_bytes(digest, "big")


def sample_ball(
    spec: MarkovSpec, radius: int, seed: int, budget: int = 200_000
) -> Configuration:
    """One exact sample of the chain restricted to the ball of given radius."""
    dom = ball(spec.rank, radius, budget=budget)
    tree = SampledTree(spec, seed)
    return Configuration({w: tree[w] for w in dom})


def empirical_cylinder(samples: Sequence, phi: Configuration) -> float:
    """Fraction of samples agreeing with phi on its whole domain."""
    if not samples:
        raise InputError("no samples given")
    hits = 0
    for x in samples:
        try:
            ok = all(x[w] == v for w, v in phi.items())
        except MissingCoordinate as exc:
            raise InputError(f"sample not defined on {exc.word}") from None
        hits += ok
    return hits / len(samples)


# ---------------------------------------------------------------------------
# JSON serialization (bit-exact round trips)
# ---------------------------------------------------------------------------


def spec_to_json(spec: MarkovSpec) -> dict:
    return {
        "generators": list(spec.generators),
        "alphabet": list(spec.alphabet),
        "pi": {str(sym): frac_to_str(spec.pi[i]) for i, sym in enumerate(spec.alphabet)},
        "kernels": {
            name: [[frac_to_str(x) for x in row] for row in spec.kernels[gi]]
            for gi, name in enumerate(spec.generators)
        },
    }


def spec_from_json(obj) -> MarkovSpec:
    if not isinstance(obj, dict):
        raise InputError("chain spec must be a JSON object")
    for key in ("generators", "alphabet", "pi", "kernels"):
        if key not in obj:
            raise InputError(f"chain spec missing {key!r}")
    generators = obj["generators"]
    if not isinstance(generators, list) or not generators:
        raise InputError("generators must be a nonempty list")
    expected = [f"s{i + 1}" for i in range(len(generators))]
    if generators != expected:
        raise InputError(f"generators must be {expected}, got {generators}")
    alphabet = obj["alphabet"]
    if not isinstance(alphabet, list) or not alphabet:
        raise InputError("alphabet must be a nonempty list")
    keys = [str(sym) for sym in alphabet]
    if len(set(keys)) != len(keys):
        raise InputError("alphabet symbols collide as strings")
    pi_obj = obj["pi"]
    if not isinstance(pi_obj, dict) or set(pi_obj) != set(keys):
        raise InputError("pi keys must match the alphabet")
    pi = tuple(frac_from_str(pi_obj[k]) for k in keys)
    kernels_obj = obj["kernels"]
    if not isinstance(kernels_obj, dict) or set(kernels_obj) != set(generators):
        raise InputError("kernels keys must match the generators")
    n = len(alphabet)
    kernels = []
    for name in generators:
        mat = kernels_obj[name]
        if not isinstance(mat, list) or len(mat) != n or any(
            not isinstance(row, list) or len(row) != n for row in mat
        ):
            raise InputError(f"kernel {name} must be a {n}x{n} matrix")
        kernels.append(tuple(tuple(frac_from_str(x) for x in row) for row in mat))
    return MarkovSpec(tuple(generators), tuple(alphabet), pi, tuple(kernels))
