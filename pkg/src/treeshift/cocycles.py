"""Finite-window rewriting rules, their cocycles, and the induced recodings.

A RewriteRule assigns to each generator letter a replacement word computed
from finitely many coordinates of the configuration near the identity.  When
the rule satisfies the flip-consistency condition (rewriting a letter and
then its inverse from the moved configuration returns the inverse word), the
letter images extend to a cocycle w(g, x) with

    w(gh, x) = w(g, h * x) . w(h, x),      g * x = w(g, x) . x,

and the recoding (Omega x)_h = x_{w(h, x)} intertwines the rewritten action
with the plain shift.  Everything here is evaluated lazily against partial
configurations: a lookup outside the available domain raises
MissingCoordinate, which the demand-driven window enumerator below uses to
extend exactly the coordinates a check actually reads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from .chains import (
    Configuration,
    MarkovSpec,
    SampledTree,
    derive_seed,
    kernel_for_letter,
)
from .errors import BudgetError, InputError, MissingCoordinate
from .words import (
    IDENTITY,
    Letter,
    Word,
    ball,
    edge_letter,
    in_past,
    inverse,
    multiply,
    parent,
    single,
)


@dataclass(frozen=True)
class RewriteRule:
    """A finite-window generator rewrite.

    rewrite(letter, window) is consulted only for letters in `active`; all
    other letters are rewritten to themselves without reading the window.
    Outputs must be reduced words of length at most max_output_length, and
    the rule may only inspect coordinates within ball(window_radius).
    """

    rank: int
    window_radius: int
    max_output_length: int
    active: frozenset[Letter]
    rewrite: Callable[[Letter, object], Word]

    def letter_image(self, letter: Letter, x) -> Word:
        if letter not in self.active:
            return single(letter)
        out = self.rewrite(letter, x)
        if len(out) > self.max_output_length:
            raise InputError(
                f"rewrite of {letter.name} has length {len(out)} > {self.max_output_length}"
            )
        return out


def identity_rule(rank: int) -> RewriteRule:
    return RewriteRule(rank, 0, 1, frozenset(), lambda l, x: single(l))


def dependency_radius(rule: RewriteRule, r: int) -> int:
    """A radius R such that cocycle words and recoded values on ball(r) only
    read base coordinates in ball(R).  Each letter step moves the window by
    at most max_output_length; r steps from radius window_radius suffice."""
    return r * rule.max_output_length + rule.window_radius


class Shifted:
    """The translated configuration (w . x)_h = x_{h w}, as a lazy view."""

    __slots__ = ("base", "offset")

    def __init__(self, base, offset: Word = IDENTITY):
        if isinstance(base, Shifted):
            offset = multiply(offset, base.offset)
            base = base.base
        self.base = base
        self.offset = offset

    def __getitem__(self, h: Word) -> int:
        return self.base[multiply(h, self.offset)]

    def shift(self, w: Word) -> "Shifted":
        return Shifted(self.base, multiply(w, self.offset))


class CocycleTable:
    """Memoized cocycle words w(., x) for one fixed configuration.

    Values are derived along the tree: for h with parent k and edge letter l,
    w(h, x) = rewrite(l, w(k,x).x) . w(k, x).  The table is a pure cache:
    entries depend only on (rule, x).
    """

    __slots__ = ("rule", "base", "_words")

    def __init__(self, rule: RewriteRule, base):
        self.rule = rule
        self.base = base
        self._words: dict[Word, Word] = {IDENTITY: IDENTITY}

    def omega(self, g: Word) -> Word:
        words = self._words
        if g in words:
            return words[g]
        chain = []
        v = g
        while v not in words:
            chain.append(v)
            v = parent(v)
        for h in reversed(chain):
            prior = words[parent(h)]
            img = self.rule.letter_image(edge_letter(h), Shifted(self.base, prior))
            words[h] = multiply(img, prior)
        return words[g]


def cocycle(rule: RewriteRule, g: Word, x) -> Word:
    """The cocycle word w(g, x); reads x within dependency_radius(rule, |g|)."""
    return CocycleTable(rule, x).omega(g)


def act(rule: RewriteRule, g: Word, x: Configuration) -> Configuration:
    """The rewritten action g * x = w(g, x) . x, materialized on the translate
    of x's domain (which must still contain the identity)."""
    w = cocycle(rule, g, x)
    winv = inverse(w)
    return Configuration({multiply(d, winv): v for d, v in x.items()})


class RecodedView:
    """The recoding (Omega x)_h = x_{w(h, x)}, as a lazy configuration."""

    __slots__ = ("table", "_memo")

    def __init__(self, rule: RewriteRule, base):
        self.table = CocycleTable(rule, base)
        self._memo: dict[Word, int] = {}

    def __getitem__(self, h: Word) -> int:
        memo = self._memo
        if h not in memo:
            memo[h] = self.table.base[self.table.omega(h)]
        return memo[h]


def recode(rule: RewriteRule, x, target_radius: int) -> Configuration:
    """Materialize the recoding on ball(target_radius); raises
    MissingCoordinate when x does not carry the needed coordinates."""
    view = RecodedView(rule, x)
    return Configuration({h: view[h] for h in ball(rule.rank, target_radius)})


# ---------------------------------------------------------------------------
# demand-driven enumeration of positive-measure windows
# ---------------------------------------------------------------------------


class _Probe:
    __slots__ = ("assign",)

    def __init__(self, assign: dict):
        self.assign = assign

    def __getitem__(self, w: Word) -> int:
        try:
            return self.assign[w]
        except KeyError:
            raise MissingCoordinate(w) from None


@dataclass
class WindowScan:
    ok: bool
    windows: int
    total_weight: Fraction
    failures: tuple


def scan_positive_windows(
    spec: MarkovSpec,
    fn,
    *,
    on_window=None,
    max_windows: int = 500_000,
    max_coords: int = 400,
) -> WindowScan:
    """Run fn against every minimal positive-measure window it can observe.

    fn receives a partial configuration and must be a deterministic function
    of the coordinates it reads; a read outside the current assignment
    branches the enumeration over all extensions of positive probability
    along the geodesic to the assigned region.  The enumerated windows are
    prefix-free and cover the space, so their weights sum to exactly 1.

    fn's return value is passed to on_window(assignment, value, weight); the
    scan's ok flag records whether every value was truthy.
    """
    state = {"count": 0, "total": Fraction(0), "ok": True}
    failures: list = []

    def run(assign: dict, weight: Fraction):
        try:
            value = fn(_Probe(assign))
        except MissingCoordinate as miss:
            g = miss.word
            if g in assign:
                raise InputError("window function missed an assigned coordinate")
            path = []
            v = g
            while v not in assign and not v.is_identity:
                path.append(v)
                v = parent(v)
            if v.is_identity and v not in assign:
                path.append(v)
            if len(assign) + len(path) > max_coords:
                raise BudgetError(f"window grew beyond {max_coords} coordinates")

            def fill(i: int, w: Fraction):
                if i < 0:
                    run(assign, w)
                    return
                h = path[i]
                if h.is_identity:
                    row = spec.pi
                else:
                    row = kernel_for_letter(spec, edge_letter(h))[assign[parent(h)]]
                for b, p in enumerate(row):
                    if p == 0:
                        continue
                    assign[h] = b
                    fill(i - 1, w * p)
                    del assign[h]

            fill(len(path) - 1, weight)
            return
        state["count"] += 1
        if state["count"] > max_windows:
            raise BudgetError(f"more than {max_windows} positive windows")
        state["total"] += weight
        if not value:
            state["ok"] = False
            if len(failures) < 5:
                failures.append((dict(assign), value))
        if on_window is not None:
            on_window(dict(assign), value, weight)

    run({}, Fraction(1))
    return WindowScan(state["ok"], state["count"], state["total"], tuple(failures))


def window_marginal(spec: MarkovSpec, fn, **kw) -> dict:
    """Exact law of fn's value over the chain: {value: probability}."""
    out: dict = {}

    def collect(assign, value, weight):
        out[value] = out.get(value, Fraction(0)) + weight

    scan = scan_positive_windows(spec, fn, on_window=collect, **kw)
    if scan.total_weight != 1:
        raise InputError("window enumeration did not cover the space")
    return out


# ---------------------------------------------------------------------------
# rule-level checks
# ---------------------------------------------------------------------------


def _checked_letters(rule: RewriteRule) -> list[Letter]:
    seen = set()
    for l in rule.active:
        seen.add(l)
        seen.add(l.inverse())
    return sorted(seen, key=Letter.sort_key)


def check_involution(rule: RewriteRule, spec: MarkovSpec, **kw) -> bool:
    """Whether rewriting a letter and then its inverse from the moved
    configuration always returns the inverse word, on every positive window."""
    for l in _checked_letters(rule):

        def fn(win, l=l):
            w = rule.letter_image(l, win)
            w_back = rule.letter_image(l.inverse(), Shifted(win, w))
            return w_back == inverse(w)

        if not scan_positive_windows(spec, fn, **kw).ok:
            return False
    return True


def check_past_preservation(
    rule: RewriteRule, spec: MarkovSpec, s: Letter, r: int, **kw
) -> bool:
    """Whether g and w(g, x) always lie on the same side of the past of s,
    for all |g| <= r and all positive windows."""
    for g in ball(rule.rank, r):
        if g.is_identity:
            continue

        def fn(win, g=g):
            table = CocycleTable(rule, win)
            return in_past(g, s) == in_past(table.omega(g), s)

        if not scan_positive_windows(spec, fn, **kw).ok:
            return False
    return True


def check_inverse_pair(
    rule: RewriteRule,
    rule_hat: RewriteRule,
    spec: MarkovSpec,
    r: int,
    *,
    samples: int = 20,
    seed: int = 0,
    **kw,
) -> bool:
    """Whether the two rules invert each other: w(w_hat(l, Omega x), x) = l on
    every positive window, and the composed recodings restore sampled
    configurations on ball(r)."""
    letters = sorted(
        set(_checked_letters(rule)) | set(_checked_letters(rule_hat)),
        key=Letter.sort_key,
    ) or _checked_letters(identity_rule(rule.rank))
    for l in letters:

        def fn(win, l=l):
            recoded = RecodedView(rule, win)
            w_hat = cocycle(rule_hat, single(l), recoded)
            return cocycle(rule, w_hat, win) == single(l)

        if not scan_positive_windows(spec, fn, **kw).ok:
            return False
    for i in range(samples):
        x = SampledTree(spec, derive_seed(seed, i))
        z = RecodedView(rule_hat, RecodedView(rule, x))
        if any(z[h] != x[h] for h in ball(rule.rank, r)):
            return False
    return True
