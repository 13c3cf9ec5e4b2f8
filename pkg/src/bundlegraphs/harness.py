"""Corpus generation, distortion reports and suite orchestration.

All ratios stay exact rationals; decimal rendering happens only when a
report is serialized.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from bundlegraphs.coding import (
    INCLUDE_ZERO,
    POSITIVE,
    Code,
    Vertex,
    as_code,
    format_code,
    format_vertex,
    iter_vertices,
    p_params,
    parse_code,
    updown,
)
from bundlegraphs.embed_esa import build_esa, check_block_lemma, check_esa_axioms, esa_separation_check, theoretical_bound
from bundlegraphs.embed_l1 import SEPARATED, build_l1, check_levels, check_pair, check_selection_lemma, dist_l1
from bundlegraphs.embed_linf import dist_linf, psi_linf
from bundlegraphs.graph import DEFAULT_VERTEX_LIMIT, SizeGuardError, bfs_from, dist_formula, materialize, vertex_count
from bundlegraphs.products import (
    check_composed_xy_many,
    check_isomorphism,
    isomorphism_full,
    oslash,
    oslash_many,
    replace_edges,
)

EMBEDDINGS = ("linf", "l1", "esa")
SUITES = ("metric_oracle", "lemma_l1", "lemma_esa", "products", "bounds")
DECIMAL_DIGITS = 12
ESA_MU_LIMIT = 7
PRODUCT_VERTEX_LIMIT = 400
METRIC_PRODUCT_LIMIT = 100


# -- corpus ----------------------------------------------------------------


@dataclass(frozen=True)
class Corpus:
    max_height: int
    max_depth: int
    kappas: tuple[int, ...]
    codes: tuple[Code, ...]

    @classmethod
    def enumerate(cls, max_height: int = 6, max_depth: int = 2, kappas: Sequence[int] = (2, 3)) -> Corpus:
        """All codes with ``M+1 <= max_height`` and depths ``<= max_depth``, by length then lex."""
        codes = [
            Code((0, *inner, 0))
            for height in range(1, max_height + 1)
            for inner in itertools.product(range(max_depth + 1), repeat=height - 1)
        ]
        return cls(max_height, max_depth, tuple(kappas), tuple(codes))

    @classmethod
    def of(cls, codes: Iterable[Code | Sequence[int] | str], kappas: Sequence[int] = (2,)) -> Corpus:
        cs = tuple(as_code(c) for c in codes)
        return cls(
            max((c.height for c in cs), default=0),
            max((c.maxdepth for c in cs), default=0),
            tuple(kappas),
            cs,
        )

    def cases(self) -> list[tuple[Code, int]]:
        return [(c, k) for c in self.codes for k in self.kappas]


# -- pair selection --------------------------------------------------------


@dataclass(frozen=True)
class PairPolicy:
    kind: str = "all"
    n: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("all", "sample"):
            raise ValueError(f"unknown pair policy {self.kind!r}")
        if self.kind == "sample" and self.n < 1:
            raise ValueError("a sample needs at least one pair")

    @classmethod
    def parse(cls, text: str) -> PairPolicy:
        """``all`` or ``sample:N`` or ``sample:N:SEED``."""
        parts = text.strip().split(":")
        if parts == ["all"]:
            return cls()
        if parts[0] == "sample" and len(parts) in (2, 3):
            try:
                nums = [int(p) for p in parts[1:]]
            except ValueError:
                raise ValueError(f"malformed pair policy {text!r}") from None
            return cls("sample", nums[0], nums[1] if len(nums) > 1 else 0)
        raise ValueError(f"malformed pair policy {text!r}")

    def __str__(self) -> str:
        return "all" if self.kind == "all" else f"sample:{self.n}:{self.seed}"

    def select(self, count: int) -> list[tuple[int, int]]:
        pairs = list(itertools.combinations(range(count), 2))
        if self.kind == "all" or self.n >= len(pairs):
            return pairs
        picked = random.Random(self.seed).sample(range(len(pairs)), self.n)
        return [pairs[t] for t in sorted(picked)]


# -- distortion reports ----------------------------------------------------


@dataclass(frozen=True)
class DistortionReport:
    code: str
    kappa: int
    embedding: str
    pairs: int
    c1: Fraction
    c2: Fraction
    distortion: Fraction | None
    bound: Fraction
    comparable_equality: bool
    passed: bool
    violations: int = 0
    first_violation: str = ""
    checks: Mapping[str, bool] = field(default_factory=dict)
    params: Mapping[str, Any] = field(default_factory=dict)


def _distance_fn(
    embedding: str,
    code: Code,
    kappa: int,
    verts: list[Vertex],
    scale_mode: str,
    index_convention: str,
    limit: int,
) -> tuple[Callable[[int, int], Fraction], Fraction, dict[str, Any]]:
    """Embedded distance by vertex index, the lower constant and report parameters."""
    if embedding == "linf":
        psi = [psi_linf(code, v) for v in verts]
        return (lambda a, b: Fraction(dist_linf(psi[a], psi[b]))), Fraction(1, 6), {}
    if embedding == "l1":
        emb = build_l1(code, kappa, scale_mode, limit)
        return (lambda a, b: dist_l1(emb, verts[a], verts[b])), Fraction(1, 2), {"scale_mode": scale_mode}
    if embedding == "esa":
        esa = build_esa(code, kappa, index_convention)
        order = {v: t for t, v in enumerate(esa.vertices)}
        rows = [order[v] for v in verts]
        sums = esa.prefix_sums()

        def dist(a: int, b: int) -> Fraction:
            return Fraction(int(np.abs(sums[rows[a]] - sums[rows[b]]).max())) / esa.eta

        params = {"index_convention": index_convention, "p_w": esa.p_w}
        return dist, Fraction(1, theoretical_bound(esa.p_w)), params
    raise ValueError(f"unknown embedding {embedding!r}; choose from {', '.join(EMBEDDINGS)}")


def evaluate(
    embedding: str,
    code: Code | Sequence[int] | str,
    kappa: int,
    pair_policy: PairPolicy | str = PairPolicy(),
    *,
    scale_mode: str = SEPARATED,
    index_convention: str = POSITIVE,
    limit: int = DEFAULT_VERTEX_LIMIT,
) -> DistortionReport:
    code = as_code(code)
    policy = PairPolicy.parse(pair_policy) if isinstance(pair_policy, str) else pair_policy
    count = vertex_count(code, kappa)
    if count > limit:
        raise SizeGuardError("bundle graph", count, limit)
    verts = list(iter_vertices(code, kappa))
    dist, lower, params = _distance_fn(embedding, code, kappa, verts, scale_mode, index_convention, limit)
    c1 = c2 = None
    violations = 0
    first = ""
    equality = True
    third = True
    pairs = policy.select(len(verts))
    for a, b in pairs:
        u, v = verts[a], verts[b]
        d = dist_formula(code, u, v)
        got = dist(a, b)
        ratio = got / d
        c1 = ratio if c1 is None or ratio < c1 else c1
        c2 = ratio if c2 is None or ratio > c2 else c2
        if not lower * d <= got <= d:
            violations += 1
            first = first or f"{format_vertex(u)}, {format_vertex(v)}: {got} outside [{lower * d}, {d}]"
        if got != d and updown(code, u, v):
            equality = False
            first = first or f"{format_vertex(u)}, {format_vertex(v)}: comparable pair at {got} != {d}"
        if 3 * got < d:
            third = False
    if c1 is None or c2 is None:
        raise ValueError("no pairs to evaluate")
    distortion = c2 / c1 if c1 > 0 else None
    bound = 1 / lower
    passed = distortion is not None and distortion <= bound and violations == 0 and equality
    checks = {"third_bound": third} if embedding == "linf" else {}
    return DistortionReport(
        format_code(code),
        kappa,
        embedding,
        len(pairs),
        c1,
        c2,
        distortion,
        bound,
        equality,
        passed,
        violations,
        first,
        checks,
        {"pair_policy": str(policy), **params},
    )


# -- serialization ---------------------------------------------------------


def render_decimal(q: Fraction) -> str:
    with localcontext() as ctx:
        ctx.prec = DECIMAL_DIGITS
        out = Decimal(q.numerator) / Decimal(q.denominator)
    return format(out, "f") if abs(out.adjusted()) < DECIMAL_DIGITS else str(out)


def report_to_dict(report: DistortionReport) -> dict[str, Any]:
    dist = report.distortion
    return {
        "code": report.code,
        "kappa": report.kappa,
        "embedding": report.embedding,
        "pairs": report.pairs,
        "c1": render_decimal(report.c1),
        "c2": render_decimal(report.c2),
        "c1_exact": str(report.c1),
        "c2_exact": str(report.c2),
        "distortion": None if dist is None else render_decimal(dist),
        "distortion_exact": None if dist is None else str(dist),
        "bound": render_decimal(report.bound),
        "bound_exact": str(report.bound),
        "comparable_equality": report.comparable_equality,
        "pass": report.passed,
        "violations": report.violations,
        "first_violation": report.first_violation,
        "checks": dict(report.checks),
        "params": dict(report.params),
    }


def report_from_dict(data: Mapping[str, Any]) -> DistortionReport:
    dist = data["distortion_exact"]
    return DistortionReport(
        code=format_code(parse_code(data["code"])),
        kappa=int(data["kappa"]),
        embedding=data["embedding"],
        pairs=int(data["pairs"]),
        c1=Fraction(data["c1_exact"]),
        c2=Fraction(data["c2_exact"]),
        distortion=None if dist is None else Fraction(dist),
        bound=Fraction(data["bound_exact"]),
        comparable_equality=bool(data["comparable_equality"]),
        passed=bool(data["pass"]),
        violations=int(data.get("violations", 0)),
        first_violation=data.get("first_violation", ""),
        checks=dict(data.get("checks", {})),
        params=dict(data.get("params", {})),
    )


# -- suites ----------------------------------------------------------------


@dataclass
class SuiteResult:
    suite: str
    cases: int = 0
    failures: int = 0
    first_failure: str = ""
    notes: dict[str, int] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    @property
    def vacuous(self) -> bool:
        return self.cases == 0

    def record(self, ok: bool, detail: str = "") -> None:
        self.cases += 1
        if not ok:
            self.failures += 1
            self.first_failure = self.first_failure or detail

    def record_many(self, oks: np.ndarray, detail: Callable[[int], str]) -> None:
        """Record one case per entry of a boolean array."""
        self.cases += len(oks)
        bad = np.flatnonzero(~np.asarray(oks, dtype=bool))
        self.failures += len(bad)
        if len(bad) and not self.first_failure:
            self.first_failure = detail(int(bad[0]))

    def absorb(self, failures: Iterable[Any], label: str) -> None:
        """Count one case, failing it with the first item of ``failures`` if any."""
        first = next(iter(failures), None)
        self.record(first is None, "" if first is None else f"{label}: {first.check} {first.detail}")

    def note(self, key: str, amount: int = 1) -> None:
        self.notes[key] = self.notes.get(key, 0) + amount

    def to_dict(self) -> dict[str, Any]:
        return {
            "suite": self.suite,
            "cases": self.cases,
            "failures": self.failures,
            "first_failure": self.first_failure,
            "vacuous": self.vacuous,
            "pass": self.passed,
            "notes": dict(sorted(self.notes.items())),
        }


@dataclass(frozen=True)
class SuiteSummary:
    results: tuple[SuiteResult, ...]

    @property
    def cases(self) -> int:
        return sum(r.cases for r in self.results)

    @property
    def vacuous(self) -> bool:
        return self.cases == 0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def exit_status(self) -> int:
        return 0 if self.passed else 1

    def to_dict(self) -> dict[str, Any]:
        return {
            "cases": self.cases,
            "vacuous": self.vacuous,
            "pass": self.passed,
            "suites": [r.to_dict() for r in self.results],
        }


def suite_metric_oracle(corpus: Corpus) -> SuiteResult:
    """Closed-form distance equals BFS distance on every pair of every corpus graph."""
    out = SuiteResult("metric_oracle")
    for code, kappa in corpus.cases():
        g = materialize(code, kappa)
        for t, u in enumerate(g.vertices):
            row = bfs_from(g, u)
            for v, d in zip(g.vertices[t:], row[t:]):
                got = dist_formula(code, u, v)
                out.record(got == d, f"{format_code(code)} k={kappa} {format_vertex(u)}, {format_vertex(v)}: formula {got}, bfs {d}")
    return out


def suite_lemma_l1(corpus: Corpus, scale_mode: str = SEPARATED) -> SuiteResult:
    """Selection lemma, per-level measures and the pairwise intersection formula."""
    out = SuiteResult("lemma_l1")
    for code, kappa in corpus.cases():
        emb = build_l1(code, kappa, scale_mode)
        label = f"{format_code(code)} k={kappa}"
        out.absorb(check_selection_lemma(emb), label)
        verts = emb.vertices
        for v in verts:
            out.absorb(check_levels(emb, v), label)
        for u, v in itertools.combinations(verts, 2):
            out.absorb(check_pair(emb, u, v), label)
    return out


def suite_lemma_esa(
    corpus: Corpus,
    mu_limit: int = ESA_MU_LIMIT,
    axiom_trials: int = 10_000,
    seed: int = 0,
    separation_convention: str = INCLUDE_ZERO,
) -> SuiteResult:
    """Block-set lemma per vertex, separation per incomparable pair and the norm axioms.

    Separation is checked with ``p_W`` taken under ``separation_convention``;
    the pairs that would fail under the other convention are tallied in
    ``notes`` without failing the suite.
    """
    out = SuiteResult("lemma_esa")
    other = POSITIVE if separation_convention == INCLUDE_ZERO else INCLUDE_ZERO
    for code, kappa in corpus.cases():
        if _mu(code, kappa) > mu_limit:
            out.note("skipped_cases")
            continue
        emb = build_esa(code, kappa, separation_convention)
        alt = build_esa(code, kappa, other)
        label = f"{format_code(code)} k={kappa}"
        for v in emb.vertices:
            out.absorb(check_block_lemma(emb, v), label)
        for u, v in itertools.combinations(emb.vertices, 2):
            if updown(code, u, v):
                continue
            ok, msg = esa_separation_check(emb, u, v)
            out.record(ok, f"{label} {format_vertex(u)}, {format_vertex(v)}: {msg}")
            if alt.p_w != emb.p_w and not esa_separation_check(alt, u, v)[0]:
                out.note(f"separation_fails_under_{other}")
    if axiom_trials and corpus.codes:
        ok, failure = check_esa_axioms(axiom_trials, seed)
        out.record(ok, f"norm axioms: {failure}")
    return out


def suite_products(
    corpus: Corpus,
    vertex_limit: int = PRODUCT_VERTEX_LIMIT,
    metric_limit: int = METRIC_PRODUCT_LIMIT,
) -> SuiteResult:
    """Composed x/y tables and the ``p_W`` product inequality on all ordered code pairs.

    The edge-replacement isomorphism is checked on ``G ⊘ G`` for products of
    at most ``vertex_limit`` vertices, and BFS distances on the replaced graph
    are compared with the closed form on the product when it has at most
    ``metric_limit`` vertices.
    """
    out = SuiteResult("products")
    by_len: dict[int, list[Code]] = {}
    for c in corpus.codes:
        by_len.setdefault(c.height, []).append(c)
    stacks = {h: _stack(g) for h, g in by_len.items()}
    p_of = {
        conv: {c: int(p) for h, g in by_len.items() for c, p in zip(g, p_params(stacks[h], conv))}
        for conv in (POSITIVE, INCLUDE_ZERO)
    }
    for w in corpus.codes:
        for h, group in by_len.items():
            stack = stacks[h]
            ok = check_composed_xy_many(w, stack)
            out.record_many(ok, lambda t: f"x/y of {format_code(w)} ⊘ {format_code(group[t])}")
            composed = oslash_many(w, stack)
            for conv in (POSITIVE, INCLUDE_ZERO):
                got = p_params(composed, conv)
                bound = np.asarray([max(p_of[conv][w], p_of[conv][wp]) for wp in group])
                out.record_many(
                    got <= bound,
                    lambda t: f"p_W ({conv}) of {format_code(w)} ⊘ {format_code(group[t])} is {got[t]} > {bound[t]}",
                )
    for w in corpus.codes:
        for kappa in corpus.kappas:
            size = vertex_count(oslash(w, w), kappa)
            if size > vertex_limit:
                out.note("skipped_isomorphisms")
                continue
            for n in [None, *range(w.height)]:
                res = check_isomorphism(w, w, kappa, n)
                where = "full" if n is None else f"level {n}"
                out.record(res.ok, f"{format_code(w)} k={kappa} {where}: {res.message}")
            if size > metric_limit:
                out.note("skipped_metric_checks")
                continue
            out.record(*_metric_consistency(w, w, kappa))
    return out


def _metric_consistency(w: Code, wp: Code, kappa: int) -> tuple[bool, str]:
    replaced = replace_edges(w, wp, kappa)
    adj: dict[Any, list[Any]] = {v: [] for v in replaced.vertices}
    for e in replaced.edges:
        a, b = tuple(e)
        adj[a].append(b)
        adj[b].append(a)
    product = oslash(w, wp)
    for src in sorted(replaced.vertices, key=repr):
        seen = {src: 0}
        frontier = [src]
        while frontier:
            nxt = []
            for x in frontier:
                for y in adj[x]:
                    if y not in seen:
                        seen[y] = seen[x] + 1
                        nxt.append(y)
            frontier = nxt
        image = isomorphism_full(w, wp, src)
        for dst, d in seen.items():
            got = dist_formula(product, image, isomorphism_full(w, wp, dst))
            if got != d:
                return False, f"{format_code(w)} ⊘ {format_code(wp)} k={kappa}: formula {got}, bfs {d}"
    return True, ""


def suite_bounds(corpus: Corpus, mu_limit: int = ESA_MU_LIMIT, index_convention: str = POSITIVE) -> SuiteResult:
    """Distortion reports for every embedding on every case."""
    out = SuiteResult("bounds")
    for code, kappa in corpus.cases():
        for name in EMBEDDINGS:
            if name == "esa" and _mu(code, kappa) > mu_limit:
                out.note("skipped_esa_cases")
                continue
            rep = evaluate(name, code, kappa, index_convention=index_convention)
            detail = rep.first_violation or f"distortion {rep.distortion} vs bound {rep.bound}"
            out.record(rep.passed, f"{name} on {rep.code} k={kappa}: {detail}")
            if name == "linf" and not rep.checks["third_bound"]:
                out.note("linf_third_bound_fails")
    return out


def run_suite(corpus: Corpus, suites: Iterable[str] = SUITES, **options: Any) -> SuiteSummary:
    """Run the named suites in a fixed order; ``options`` go to the suites that accept them."""
    chosen = set(suites)
    unknown = chosen - set(SUITES)
    if unknown:
        raise ValueError(f"unknown suites: {', '.join(sorted(unknown))}")
    runners: dict[str, Callable[..., SuiteResult]] = {
        "metric_oracle": suite_metric_oracle,
        "lemma_l1": suite_lemma_l1,
        "lemma_esa": suite_lemma_esa,
        "products": suite_products,
        "bounds": suite_bounds,
    }
    results = []
    for name in SUITES:
        if name not in chosen:
            continue
        fn = runners[name]
        accepted = fn.__code__.co_varnames[1 : fn.__code__.co_argcount]
        results.append(fn(corpus, **{k: v for k, v in options.items() if k in accepted}))
    return SuiteSummary(tuple(results))


def _mu(code: Code, kappa: int) -> int:
    return sum(kappa**n for n in range(code.maxdepth + 1))


def _stack(codes: Sequence[Code]) -> np.ndarray:
    return np.asarray([c.depths for c in codes], dtype=np.int64)


def iter_reports(corpus: Corpus, embeddings: Sequence[str] = EMBEDDINGS, **options: Any) -> Iterator[DistortionReport]:
    for code, kappa in corpus.cases():
        for name in embeddings:
            yield evaluate(name, code, kappa, **options)
