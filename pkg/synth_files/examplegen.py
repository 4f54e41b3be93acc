"""Example generation, derivation coverage and distinguishing-input validation.

Strings are drawn top-down from the sketch's context-free grammar. A string is
kept only when its production set is new, so a suite grows one derivation
class at a time; the oracle labels each kept string under a sampled context.
Validation looks for an alternate completion that passes the same examples and
a string on which the two completions disagree.
"""

# Import Libraries
import itertools
import logging
import math
import random
import string
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple, Union

from synth_files.dsl import DslExpr, DslGrammar, compile_expr, sample_envs
from synth_files.errors import EvalError, ExampleError, LexError, OracleDomainError, ParseError, SketchError
from synth_files.evaluator import Trace, eval_trace, gen_trace
from synth_files.grammar import Production, Sketch, Symbol, prod_holes, sketchy_prods
from synth_files.oracles import OracleHandle
from synth_files.parser import ParseTree, leaves, parse_text, prod_set, tokenize
from synth_files.synth_states import CoverageSummary, SynthesisBudget, ValidationBounds
from synth_files.synthesis import Constraint, Example, ExampleBook, synthesize
from synth_files.values import Int, Value, close, value_eq

logger = logging.getLogger(__name__)

FRESH_BIAS = 0.7
SHALLOW_AFTER = 0.8
CONTEXT_RANGE = (-5, 5)
RESAMPLE_LIMIT = 16

_EVAL_FAILURES = (EvalError, OverflowError, ZeroDivisionError, TypeError, ValueError)


# Coverage


@dataclass
class CoverageState:
    """Production sets achieved so far (Q1) and per-production hit counts."""

    q1: Set[frozenset] = field(default_factory=set)
    hits: Counter = field(default_factory=Counter)

    @property
    def covered(self) -> Set[int]:
        return set(self.hits)

    def add(self, prods: frozenset) -> bool:
        """Record a production set; True when it was new."""
        self.hits.update(prods)
        if prods in self.q1:
            return False
        self.q1.add(prods)
        return True

    def summary(self, s: Sketch) -> CoverageSummary:
        total = len(s.productions)
        fraction = math.log2(len(self.q1)) - total if self.q1 else float("-inf")
        return CoverageSummary(q1_count=len(self.q1), covered=sorted(self.covered), total_prods=total, fraction_log2=fraction)


def _tree(s: Sketch, text: str) -> ParseTree:
    try:
        return parse_text(s, text)
    except (LexError, ParseError) as e:
        raise ExampleError(text, e) from None


def derivation_coverage(s: Sketch, strings: Iterable[str]) -> CoverageSummary:
    """Derivation coverage of a set of strings.

    Returns:
        CoverageSummary: |Q1|, the productions used by some string, and
            log2|Q1| - |P|.

    Raises:
        ExampleError: Naming the first string that does not parse.
    """
    state = CoverageState()
    for text in strings:
        state.add(prod_set(_tree(s, text)))
    return state.summary(s)


# Sampling strings


def production_costs(s: Sketch) -> Dict[int, float]:
    """Height of the shallowest complete derivation starting with each production."""
    nonterminal = {sym.name: not sym.terminal for sym in s.symbols}
    best: Dict[str, float] = {sym.name: math.inf for sym in s.symbols if not sym.terminal}
    cost: Dict[int, float] = {p.id: math.inf for p in s.productions}
    changed = True
    while changed:
        changed = False
        for p in s.productions:
            c = 1 + max((best[b] for b in p.body if nonterminal[b]), default=0)
            if c < cost[p.id]:
                cost[p.id] = c
                changed = True
            if c < best[p.head]:
                best[p.head] = c
                changed = True
    return cost


def _lexes_as(s: Sketch, lexeme: str, name: str) -> bool:
    try:
        toks = tokenize(s, lexeme)
    except LexError:
        return False
    return len(toks) == 1 and toks[0].symbol == name


def lexeme_pool(s: Sketch, t: Symbol) -> Tuple[str, ...]:
    """Lexemes the sampler may emit for terminal t.

    Raises:
        SketchError: If no candidate lexeme tokenizes back to t.
    """
    if not t.regex:
        return (t.pattern,)
    if t.value_kind == "int":
        candidates: Sequence[str] = string.digits
    elif t.value_kind == "ident":
        candidates = s.var_pool or tuple(string.ascii_lowercase)
    else:
        candidates = tuple(s.var_pool) + tuple(string.ascii_lowercase) + tuple(string.digits)
    pool = tuple(c for c in dict.fromkeys(candidates) if _lexes_as(s, c, t.name))
    if not pool:
        raise SketchError(f"cannot sample a lexeme for terminal {t.name}")
    return pool


def _wordy(c: str) -> bool:
    return c.isalnum() or c == "_"


def join_lexemes(lexemes: Sequence[str]) -> str:
    """Concatenate lexemes, with a space only between two word characters."""
    out = ""
    for lx in lexemes:
        if out and _wordy(out[-1]) and _wordy(lx[0]):
            out += " "
        out += lx
    return out


class StringSampler:
    """Top-down random derivations of the sketch's context-free grammar.

    Select is epsilon-greedy: with probability 0.7 it picks among the
    alternatives whose production is neither in the derivation being built nor
    in `avoid`; otherwise among all. Past 80% of the depth budget only the
    alternatives of minimal height remain, so every derivation terminates.
    """

    def __init__(self, s: Sketch, rng: random.Random, max_depth: int = 12):
        if max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        self.s = s
        self.rng = rng
        self.max_depth = max_depth
        self.cost = production_costs(s)
        self.terminal = {sym.name: sym.terminal for sym in s.symbols}
        self.pools = {t.name: lexeme_pool(s, t) for t in s.terminals if self._used(t.name)}

    def _used(self, name: str) -> bool:
        return any(name in p.body for p in self.s.productions)

    def select(self, head: str, depth: int, deriv: Set[int], avoid: Set[int]) -> Optional[Production]:
        alts = [p for p in self.s.by_head(head) if self.cost[p.id] < math.inf]
        if not alts:
            return None
        if depth >= SHALLOW_AFTER * self.max_depth:
            low = min(self.cost[p.id] for p in alts)
            return self.rng.choice([p for p in alts if self.cost[p.id] == low])
        fresh = [p for p in alts if p.id not in deriv and p.id not in avoid]
        if fresh and self.rng.random() < FRESH_BIAS:
            return self.rng.choice(fresh)
        return self.rng.choice(alts)

    def _expand(self, sym: str, depth: int, deriv: Set[int], avoid: Set[int], out: List[Tuple[str, str]]) -> bool:
        if self.terminal[sym]:
            out.append((sym, self.rng.choice(self.pools[sym])))
            return True
        p = self.select(sym, depth, deriv, avoid)
        if p is None:
            return False
        deriv.add(p.id)
        return all(self._expand(b, depth + 1, deriv, avoid, out) for b in p.body)

    def draw(self, avoid: Iterable[int] = ()) -> Optional[Tuple[str, ParseTree]]:
        """One random string and its parse tree, or None when it is rejected.

        Strings that lex differently than they were derived, or parse
        ambiguously, are rejected.
        """
        out: List[Tuple[str, str]] = []
        if not self._expand(self.s.start, 0, set(), set(avoid), out):
            return None
        symbols = [sym for sym, _ in out]
        lexemes = [lx for _, lx in out]
        for text in (join_lexemes(lexemes), " ".join(lexemes)):
            try:
                if [t.symbol for t in tokenize(self.s, text)] != symbols:
                    continue
                return text, parse_text(self.s, text)
            except LexError:
                continue
            except ParseError as e:
                logger.debug("rejected %r: %s", text, e)
                return None
        return None


def free_variables(s: Sketch, tree: ParseTree) -> List[str]:
    """Lexemes of the identifier tokens of a tree, first occurrence order."""
    names = [t.lexeme for t in leaves(tree) if s.symbol(t.symbol).value_kind == "ident"]
    return list(dict.fromkeys(names))


def sample_context(names: Iterable[str], seed: Union[int, random.Random] = 0) -> Dict[str, Value]:
    """Bind each name to a uniform integer in [-5, 5].

    Contexts stay Int whatever kind the attributes take; a rule reading a
    variable into a real or dual, like `Dual(lookUp(var), 1)`, lifts it, so
    oracles and example files always see integer contexts.
    """
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    lo, hi = CONTEXT_RANGE
    return {name: Int(rng.randint(lo, hi)) for name in sorted(set(names))}


def label(
    s: Sketch,
    text: str,
    tree: ParseTree,
    oracle: OracleHandle,
    rng: random.Random,
    limit: int = RESAMPLE_LIMIT,
) -> Example:
    """Sample a context for a string and ask the oracle for its value.

    A context is redrawn while the oracle or the concrete part of the
    evaluation hits a domain error.

    Raises:
        OracleDomainError: If no valid context is found within `limit` draws.
        OracleError: If the oracle fails otherwise.
    """
    names = free_variables(s, tree)
    tries = limit if names else 1
    for _ in range(tries):
        beta = sample_context(names, rng)
        try:
            gen_trace(s, tree, beta)
            value = oracle.query(text, beta)
        except (EvalError, OracleDomainError) as e:
            logger.debug("resampling context of %r: %s", text, e)
            continue
        return Example.of(text, beta, value)
    raise OracleDomainError(f"no valid context for {text!r} after {tries} draws")


def generate_example(
    s: Sketch,
    oracle: OracleHandle,
    cov: CoverageState,
    rng: random.Random,
    max_depth: int = 12,
    sampler: Optional[StringSampler] = None,
) -> Optional[Example]:
    """Draw one string; keep it only if its production set is new.

    Returns:
        Optional[Example]: The labelled example, or None (rejected) when the
            production set is already in `cov`, the string is unusable or no
            valid context exists. An accepted set is added to `cov`.

    Raises:
        OracleError: If the oracle fails on a valid query.
    """
    drawn = (sampler or StringSampler(s, rng, max_depth)).draw(cov.covered)
    if drawn is None:
        return None
    text, tree = drawn
    prods = prod_set(tree)
    if prods in cov.q1:
        return None
    try:
        ex = label(s, text, tree, oracle, rng)
    except OracleDomainError as e:
        logger.debug("rejected %r: %s", text, e)
        return None
    cov.add(prods)
    logger.info("accepted %s with production set %s", ex, sorted(prods))
    return ex


@dataclass
class GeneratedSuite:
    """Outcome of generate_suite.

    Attributes:
        examples (list[Example]): Sorted suite.
        coverage (CoverageState): Coverage after generation.
        complete (bool): False when attempts ran out before the target.
        attempts (int): generate_example calls made.
    """

    examples: List[Example]
    coverage: CoverageState
    complete: bool
    attempts: int


def generate_suite(
    s: Sketch,
    oracle: OracleHandle,
    target_sets: int,
    max_attempts: Optional[int] = None,
    seed: int = 0,
    max_depth: int = 12,
    cov: Optional[CoverageState] = None,
) -> GeneratedSuite:
    """Generate examples until |Q1| reaches `target_sets`.

    The suite is sorted by production-set size, then token count, so smaller
    derivations and smaller examples come first.

    Raises:
        ValueError: If target_sets < 1.
        OracleError: If the oracle fails.
    """
    if target_sets < 1:
        raise ValueError("target_sets must be >= 1")
    max_attempts = max_attempts or 200 * target_sets
    rng = random.Random(seed)
    cov = cov if cov is not None else CoverageState()
    sampler = StringSampler(s, rng, max_depth)
    found: List[Tuple[tuple, Example]] = []
    attempts = 0
    while len(cov.q1) < target_sets and attempts < max_attempts:
        attempts += 1
        ex = generate_example(s, oracle, cov, rng, max_depth, sampler)
        if ex is not None:
            tree = parse_text(s, ex.input)
            found.append(((len(prod_set(tree)), len(leaves(tree)), ex.input, ex.context_json()), ex))
    complete = len(cov.q1) >= target_sets
    if not complete:
        logger.warning("only %d of %d production sets after %d attempts", len(cov.q1), target_sets, attempts)
    found.sort(key=lambda pair: pair[0])
    return GeneratedSuite([ex for _, ex in found], cov, complete, attempts)


# Validation

UNIQUE = "unique"
FOUND = "found"
ZERO_SAMPLES = "zero-samples"


@dataclass
class ValidationOutcome:
    """Outcome of validate.

    Attributes:
        status (str): "found", "unique" (within bounds, not a proof) or
            "zero-samples" (K = 0, no input was tried).
        example (Optional[Example]): Distinguishing example, when found.
        holes (tuple[str, ...]): Holes rebound by the disagreeing alternate.
        alternate (dict[str, DslExpr]): The disagreeing alternate bodies.
        alternates (int): Alternate bindings tried.
        tried (int): (string, context) pairs evaluated.
        confirmed (list[Example]): Disagreements the oracle settled in favour
            of the current completion.
    """

    status: str
    example: Optional[Example] = None
    holes: Tuple[str, ...] = ()
    alternate: Dict[str, DslExpr] = field(default_factory=dict)
    alternates: int = 0
    tried: int = 0
    confirmed: List[Example] = field(default_factory=list)

    @property
    def unique(self) -> bool:
        return self.status != FOUND


def _behaviour(body: DslExpr, envs: Sequence[Mapping[str, object]]) -> tuple:
    fn = compile_expr(body)
    out = []
    for env in envs:
        try:
            out.append(fn(env))
        except _EVAL_FAILURES:
            out.append(None)
    return tuple(out)


def _near(x, y) -> bool:
    if isinstance(x, tuple) and isinstance(y, tuple):
        return len(x) == len(y) and all(_near(a, b) for a, b in zip(x, y))
    if type(x) in (int, float) and type(y) in (int, float):
        return close(x, y, 1e-9)
    return x == y


def alternate_bodies(
    holes: Sequence[str],
    ready: Mapping[str, DslExpr],
    constraints: Sequence[Constraint],
    s: Sketch,
    dsl: DslGrammar,
    budget: SynthesisBudget,
    limit: int,
) -> List[Dict[str, DslExpr]]:
    """Up to `limit` rebindings of `holes` that pass the constraints with the
    other ready bodies fixed.

    Every hole of a rebinding behaves differently from its ready body, and no
    two rebindings behave alike. Only the goal-directed search pass is used.
    """
    decls = {h.name: h for h in s.holes}
    envs = {h: sample_envs(decls[h].signature, 16, budget.seed + 7) for h in holes}
    current = {h: _behaviour(ready[h], envs[h]) for h in holes}
    seen: List[Dict[str, tuple]] = []
    frozen = {h: e for h, e in ready.items() if h not in holes}
    out: List[Dict[str, DslExpr]] = []

    def known(cand: Mapping[str, DslExpr]) -> bool:
        if not all(h in cand for h in holes):
            return True
        vecs = {h: _behaviour(cand[h], envs[h]) for h in holes}
        if any(_near(vecs[h], current[h]) for h in holes):
            return True
        return any(all(_near(vecs[h], other[h]) for h in holes) for other in seen)

    while len(out) < limit:
        res = synthesize(constraints, dsl, decls, frozen, budget, reject=known, exhaustive=False)
        if not res.ok or not all(h in res.bindings for h in holes):
            break
        alt = {h: res.bindings[h] for h in holes}
        out.append(alt)
        seen.append({h: _behaviour(alt[h], envs[h]) for h in holes})
        logger.info("alternate for %s: %s", ", ".join(holes), {h: str(e) for h, e in alt.items()})
    return out


def hole_groups(book: ExampleBook, examples: Sequence[Example], ready: Mapping[str, DslExpr], pairs: bool) -> List[Tuple[str, ...]]:
    """Single ready holes, then pairs of ready holes that some example reaches together."""
    groups = [(h,) for h in sorted(ready)]
    if pairs:
        shared: Set[Tuple[str, ...]] = set()
        for ex in examples:
            reached = sorted(book.holes_of(ex.input) & set(ready))
            shared.update(itertools.combinations(reached, 2))
        groups.extend(sorted(shared))
    return groups


def _disagreements(
    s: Sketch,
    sampler: StringSampler,
    ready: Mapping[str, DslExpr],
    other: Mapping[str, DslExpr],
    holes: Sequence[str],
    bounds: ValidationBounds,
    rng: random.Random,
    tol: float,
    outcome: ValidationOutcome,
) -> Iterator[Tuple[str, Dict[str, Value], Value]]:
    reaching = {pid for pid in sketchy_prods(s) if prod_holes(s, pid) & set(holes)}
    avoid = {p.id for p in s.productions} - reaching
    for _ in range(bounds.strings):
        drawn = sampler.draw(avoid)
        if drawn is None:
            continue
        text, tree = drawn
        if not prod_set(tree) & reaching:
            continue
        names = free_variables(s, tree)
        for _ in range(bounds.contexts if names else 1):
            beta = sample_context(names, rng)
            outcome.tried += 1
            try:
                tr: Trace = gen_trace(s, tree, beta)
                mine, theirs = eval_trace(tr, ready), eval_trace(tr, other)
            except _EVAL_FAILURES:
                continue
            if not value_eq(mine, theirs, tol):
                yield text, beta, mine


def validate(
    s: Sketch,
    ready: Mapping[str, DslExpr],
    examples: Sequence[Example],
    dsl: DslGrammar,
    oracle: OracleHandle,
    bounds: Optional[ValidationBounds] = None,
    seed: int = 0,
    budget: Optional[SynthesisBudget] = None,
    tol: float = 1e-6,
) -> ValidationOutcome:
    """Search for a distinguishing input of the completion `ready`.

    For each hole, and then for each pair of holes reached by one example
    when `bounds.hole_pairs` is set, alternate bodies that also pass
    `examples` are synthesized; for each alternate, up to K strings times C contexts are sampled and the
    two completions compared. Each disagreement is labelled by the oracle.
    One that sides with `ready` drops the alternate and is kept in
    `confirmed`; the first one that refutes `ready` is returned as a new
    example.

    Returns:
        ValidationOutcome: "found" with the example, or "unique" when the oracle
            never refuted `ready` on a sampled input (bounded, not a proof), or
            "zero-samples" when K = 0.

    Raises:
        ExampleError: If an example does not parse or evaluate.
        OracleError: If the oracle fails.
    """
    bounds = bounds or ValidationBounds()
    budget = budget or SynthesisBudget()
    if bounds.strings == 0:
        logger.warning("validation ran with no sampled inputs")
        return ValidationOutcome(ZERO_SAMPLES)
    book = ExampleBook(s)
    constraints = [Constraint(book.trace(ex), ex.output, tol, ex) for ex in examples]
    rng = random.Random(seed)
    sampler = StringSampler(s, rng, bounds.max_depth)
    outcome = ValidationOutcome(UNIQUE)
    for holes in hole_groups(book, examples, ready, bounds.hole_pairs):
        for alt in alternate_bodies(holes, ready, constraints, s, dsl, budget, bounds.max_alternates):
            outcome.alternates += 1
            other = {**ready, **alt}
            for text, beta, mine in _disagreements(s, sampler, ready, other, holes, bounds, rng, tol, outcome):
                try:
                    value = oracle.query(text, beta)
                except OracleDomainError:
                    continue
                if value_eq(mine, value, tol):
                    outcome.confirmed.append(Example.of(text, beta, value))
                    logger.info("oracle sides with the completion on %r; alternate for %s dropped", text, ", ".join(holes))
                    break
                outcome.status = FOUND
                outcome.example = Example.of(text, beta, value)
                outcome.holes, outcome.alternate = holes, alt
                logger.info("distinguishing input for %s: %s", ", ".join(holes), outcome.example)
                return outcome
    logger.info("no distinguishing input within bounds (%d alternates, %d inputs tried)", outcome.alternates, outcome.tried)
    return outcome
