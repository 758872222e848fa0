"""Edge slides: recodings that transfer support edges between directions.

A slide is parameterized by two distinct generators u, t and a special set
of u-support edges.  Its rewrite rule replaces a t-step by ut or u^-1 t on
configurations flagged by a local detector, so the recoded chain keeps every
restriction except the one along t, whose support gains the slid edges (and
with them aperiodicity).  The flag reads the symbol one u-step behind, the
current symbol, and the symbol at the branch distance ahead in the u
direction, so the rule has window radius n_max + 2 where n_max is the
largest branch distance among slide targets.

The pushforward kernel along t is computed exactly by enumerating the
decision window; everything else about the measure is unchanged.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .chains import (
    Configuration,
    MarkovSpec,
    Matrix,
    SampledTree,
    cylinder_measure,
    derive_seed,
    enumerate_cylinders,
    frac_to_str,
    require_valid,
)
from .cocycles import (
    CocycleTable,
    RecodedView,
    RewriteRule,
    Shifted,
    identity_rule,
    window_marginal,
)
from .errors import InputError, ParamsError, TreeshiftError
from .graphs import (
    BranchData,
    TransitionGraph,
    branch_data,
    classes,
    classify,
    is_periodic_class,
    is_special,
    special_sets,
    support_edges,
)
from .words import IDENTITY, LeftConnectedSet, Letter, Word, ball, inverse, single

ZERO = Fraction(0)


@dataclass(frozen=True)
class SlideParams:
    """Everything needed to rebuild one slide's rewrite rule."""

    rank: int
    u: int
    t: int
    edges: frozenset[tuple[int, int]]
    branch: tuple[tuple[int, BranchData], ...]  # per slide-edge target, sorted

    def branch_of(self, b: int) -> BranchData:
        for key, data in self.branch:
            if key == b:
                return data
        raise InputError(f"no branch data for symbol index {b}")

    @property
    def n_max(self) -> int:
        return max((data.n for _, data in self.branch), default=0)

    @property
    def flagged(self) -> frozenset[tuple[int, int, int]]:
        eta = dict(self.branch)
        return frozenset((a, b, eta[b].eta) for a, b in self.edges)


def build_slide_params(
    spec: MarkovSpec, u: int, t: int, edges: Iterable[tuple[int, int]]
) -> SlideParams:
    """Validate a slide edge set against the spec and derive its branch data."""
    if u == t:
        raise ParamsError("slide directions u and t must be distinct generators")
    for gi in (u, t):
        if not 0 <= gi < spec.rank:
            raise ParamsError(f"generator index {gi} out of range")
    edge_set = frozenset((int(a), int(b)) for a, b in edges)
    g = support_edges(spec, u)
    if not edge_set <= g.edges:
        raise ParamsError("slide edges must be u-support edges")
    if not is_special(g, edge_set):
        raise ParamsError("slide edge set is not special for the u-restriction")
    branch = tuple(
        (b, branch_data(g, b)) for b in sorted({b for _, b in edge_set})
    )
    return SlideParams(spec.rank, u, t, edge_set, branch)


def flag_triple(params: SlideParams, x):
    """The local detector: (x_{u^-1}, x_e, x_{u^n}) with n the branch distance
    of x_e, defined when (x_{u^-1}, x_e) is a slide edge; None otherwise."""
    u = Letter(params.u, 1)
    a = x[single(u.inverse())]
    b = x[IDENTITY]
    if (a, b) not in params.edges:
        return None
    n = params.branch_of(b).n
    return (a, b, x[Word((u,) * n)])


def _hits(params: SlideParams, x) -> bool:
    triple = flag_triple(params, x)
    return triple is not None and triple in params.flagged


def rule_from_params(params: SlideParams) -> RewriteRule:
    """The slide's rewrite rule, reconstructed from the parameters alone."""
    if not params.edges:
        return identity_rule(params.rank)
    u = Letter(params.u, 1)
    t = Letter(params.t, 1)
    w_t = single(t)
    w_ut = Word((u, t))
    w_uinv_t = Word((u.inverse(), t))
    w_u = single(u)

    def rewrite(l: Letter, x) -> Word:
        if l == t:
            up = _hits(params, Shifted(x, w_ut))
            down = _hits(params, Shifted(x, w_t))
            if up and down:
                raise ParamsError("conflicting slide conditions: edge set is not special")
            if up:
                return w_ut
            if down:
                return w_uinv_t
            return w_t
        up = _hits(params, x)
        down = _hits(params, Shifted(x, w_u))
        if up and down:
            raise ParamsError("conflicting slide conditions: edge set is not special")
        if up:
            return inverse(w_ut)
        if down:
            return inverse(w_uinv_t)
        return single(t.inverse())

    return RewriteRule(
        rank=params.rank,
        window_radius=params.n_max + 2,
        max_output_length=2,
        active=frozenset({t, t.inverse()}),
        rewrite=rewrite,
    )


def slide_rule(spec: MarkovSpec, params: SlideParams) -> RewriteRule:
    """Validate the parameters against the spec, then build the rule."""
    if params.rank != spec.rank:
        raise ParamsError("rank mismatch between slide parameters and spec")
    if params.edges:
        g = support_edges(spec, params.u)
        if not params.edges <= g.edges or not is_special(g, params.edges):
            raise ParamsError("slide edge set is not special for the u-restriction")
    return rule_from_params(params)


def _decision_domain(params: SlideParams) -> LeftConnectedSet:
    u = Letter(params.u, 1)
    t = Letter(params.t, 1)
    words = [IDENTITY, single(t), Word((u.inverse(), t))]
    for k in range(1, params.n_max + 2):
        words.append(Word((u,) * k + (t,)))
    return LeftConnectedSet(words)


class _DictWindow:
    __slots__ = ("values",)

    def __init__(self, values: dict):
        self.values = values

    def __getitem__(self, w: Word) -> int:
        from .errors import MissingCoordinate

        try:
            return self.values[w]
        except KeyError:
            raise MissingCoordinate(w) from None


def pushforward(spec: MarkovSpec, params: SlideParams) -> MarkovSpec:
    """The recoded measure, as a spec: kernels off t unchanged, the t kernel
    recomputed exactly by enumerating the slide's decision window."""
    rule = slide_rule(spec, params)
    if not params.edges:
        return spec
    t = Letter(params.t, 1)
    domain = _decision_domain(params)
    n = spec.size
    mass = [[ZERO] * n for _ in range(n)]
    for values, weight in enumerate_cylinders(spec, domain):
        assign = dict(zip(domain.words, values))
        img = rule.letter_image(t, _DictWindow(assign))
        mass[assign[IDENTITY]][assign[img]] += weight
    for a in range(n):
        if sum(mass[a]) != spec.pi[a]:
            raise TreeshiftError("pushforward window enumeration lost mass")
    q: Matrix = tuple(
        tuple(mass[a][b] / spec.pi[a] for b in range(n)) for a in range(n)
    )
    return require_valid(spec.with_kernel(params.t, q))


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------


@dataclass
class SlideReport:
    double_recode_identity: bool
    orbit_surjective: bool
    markov_factorization: bool
    support_contains_slid_edges: bool
    endpoints_aperiodic: bool
    q_t: Matrix

    @property
    def all_ok(self) -> bool:
        return (
            self.double_recode_identity
            and self.orbit_surjective
            and self.markov_factorization
            and self.support_contains_slid_edges
            and self.endpoints_aperiodic
        )

    def to_json(self, spec: MarkovSpec) -> dict:
        return {
            "double_recode_identity": self.double_recode_identity,
            "orbit_surjective": self.orbit_surjective,
            "markov_factorization": self.markov_factorization,
            "support_contains_slid_edges": self.support_contains_slid_edges,
            "endpoints_aperiodic": self.endpoints_aperiodic,
            "all_ok": self.all_ok,
            "q_t": [[frac_to_str(x) for x in row] for row in self.q_t],
        }


def _markov_check_domains(spec: MarkovSpec, params: SlideParams) -> list[LeftConnectedSet]:
    u = Letter(params.u, 1)
    t = Letter(params.t, 1)
    doms = [LeftConnectedSet([IDENTITY])]
    for l in (Letter(i, s) for i in range(spec.rank) for s in (1, -1)):
        doms.append(LeftConnectedSet([IDENTITY, single(l)]))
    doms.append(LeftConnectedSet([IDENTITY, single(t), Word((u, t))]))
    doms.append(LeftConnectedSet([IDENTITY, single(t), Word((u.inverse(), t))]))
    if spec.size <= 2:
        doms.append(LeftConnectedSet([IDENTITY, single(t), Word((t, t))]))
    return doms


def verify_slide(
    spec: MarkovSpec,
    params: SlideParams,
    *,
    candidate: MarkovSpec | None = None,
    seed: int = 2024,
    samples: int = 25,
    max_windows: int = 500_000,
) -> SlideReport:
    """Check the slide's claims against the given spec.

    candidate defaults to the exact pushforward; passing a different spec
    lets callers test that corrupted kernels are caught.
    """
    rule = slide_rule(spec, params)
    if candidate is None:
        candidate = pushforward(spec, params)
    rank = spec.rank

    double_ok = True
    orbit_ok = True
    ball2 = ball(rank, 2)
    ball4 = ball(rank, 4)
    for i in range(samples):
        x = SampledTree(spec, derive_seed(seed, i))
        z = RecodedView(rule, RecodedView(rule, x))
        if any(z[h] != x[h] for h in ball2):
            double_ok = False
        table = CocycleTable(rule, x)
        images = {table.omega(h) for h in ball4}
        if any(g not in images for g in ball2):
            orbit_ok = False

    markov_ok = True
    for domain in _markov_check_domains(spec, params):
        words = domain.words

        def fn(win, words=words):
            view = RecodedView(rule, win)
            return tuple(view[g] for g in words)

        marginal = window_marginal(spec, fn, max_windows=max_windows)
        for values in itertools.product(range(spec.size), repeat=len(words)):
            expected = cylinder_measure(candidate, Configuration(dict(zip(words, values))))
            if marginal.get(values, ZERO) != expected:
                markov_ok = False
                break

    q = candidate.kernels[params.t]
    rho_graph = TransitionGraph(
        spec.size,
        frozenset(
            (a, b)
            for a in range(spec.size)
            for b in range(spec.size)
            if spec.pi[a] * q[a][b] > 0
        ),
    )
    mu_t = support_edges(spec, params.t)
    support_ok = mu_t.edges <= rho_graph.edges
    for a, b in params.edges:
        for alpha in mu_t.in_neighbors(a):
            if (alpha, b) not in rho_graph.edges:
                support_ok = False
    part = classes(rho_graph)
    for a, b in params.edges | mu_t.edges:
        if part.class_of[a] != part.class_of[b]:
            support_ok = False

    aperiodic_ok = True
    for a, b in params.edges:
        for v in (a, b):
            cls = part.classes[part.class_of[v]]
            if is_periodic_class(rho_graph, cls):
                aperiodic_ok = False

    return SlideReport(double_ok, orbit_ok, markov_ok, support_ok, aperiodic_ok, q)


# ---------------------------------------------------------------------------
# the pipeline to a generator-ergodic chain
# ---------------------------------------------------------------------------


def _aperiodic_witness(spec: MarkovSpec) -> tuple[int, int]:
    """Smallest (generator, symbol) whose restriction class is aperiodic."""
    for gi in range(spec.rank):
        g = support_edges(spec, gi)
        part = classes(g)
        for a in range(spec.size):
            cls = part.classes[part.class_of[a]]
            if not is_periodic_class(g, cls):
                return gi, a
    raise InputError("no aperiodic restriction class: chain is not properly ergodic")


def _slide_round(
    spec: MarkovSpec, u: int, a: int, slides: list[SlideParams]
) -> MarkovSpec:
    """Slide both halves of the spanning tree of a's u-class onto every other
    generator, in generator order."""
    sets = special_sets(spec, u, a)
    for edge_set in (sets.e1, sets.e2):
        if not edge_set:
            continue
        for t in range(spec.rank):
            if t == u:
                continue
            params = build_slide_params(spec, u, t, edge_set)
            spec = pushforward(spec, params)
            slides.append(params)
    return spec


def generator_ergodic_pipeline(
    spec: MarkovSpec,
) -> tuple[MarkovSpec, tuple[SlideParams, ...]]:
    """Slide until every generator restriction is ergodic and essentially free.

    Stage 1 spreads one aperiodic class across all directions; the following
    sweeps repeat the construction with every generator as the source until
    classification passes.  The sweep count is bounded; exceeding the bound
    signals an implementation bug, not an obstruction.
    """
    require_valid(spec)
    c = classify(spec)
    if c.generator_ergodic:
        return spec, ()
    if not c.properly_ergodic:
        raise InputError("pipeline requires a properly ergodic chain")
    u0, a = _aperiodic_witness(spec)
    slides: list[SlideParams] = []
    spec = _slide_round(spec, u0, a, slides)
    for _ in range(spec.size * spec.rank + 2):
        if classify(spec).generator_ergodic:
            return spec, tuple(slides)
        for u in range(spec.rank):
            spec = _slide_round(spec, u, a, slides)
    raise TreeshiftError("pipeline did not stabilize: implementation bug")


def replay(
    slides: Sequence[SlideParams], x, radius: int, rank: int | None = None
) -> Configuration:
    """Apply each slide's recoding in order and materialize on ball(radius).

    The recodings compose lazily, so x may be any coordinate map (a sampled
    tree, a large configuration); coordinates are pulled through the tower on
    demand.  rank is taken from the slides when present.
    """
    if rank is None:
        if not slides:
            raise InputError("replay of an empty slide sequence needs an explicit rank")
        rank = slides[0].rank
    view = x
    for params in slides:
        view = RecodedView(rule_from_params(params), view)
    return Configuration({h: view[h] for h in ball(rank, radius)})


# ---------------------------------------------------------------------------
# parameter (de)serialization
# ---------------------------------------------------------------------------


def params_to_json(spec: MarkovSpec, params: SlideParams) -> dict:
    alpha = spec.alphabet
    return {
        "u": spec.generators[params.u],
        "t": spec.generators[params.t],
        "E": [[alpha[a], alpha[b]] for a, b in sorted(params.edges)],
        "branch": {
            str(alpha[b]): {
                "n": data.n,
                "path": [alpha[v] for v in data.path],
                "eta": alpha[data.eta],
            }
            for b, data in params.branch
        },
    }


def params_from_json(spec: MarkovSpec, obj) -> SlideParams:
    if not isinstance(obj, dict) or "u" not in obj or "t" not in obj or "E" not in obj:
        raise InputError("slide params must be an object with u, t, E")
    u = spec.generator_index(obj["u"])
    t = spec.generator_index(obj["t"])
    edges = [(spec.symbol_index(a), spec.symbol_index(b)) for a, b in obj["E"]]
    return build_slide_params(spec, u, t, edges)
