"""Hole synthesis from input/output examples.

Every example is evaluated symbolically into a trace; a Constraint states that
the trace yields the expected value once its holes are bound. `synthesize`
searches DSL bodies for the open holes of a constraint set, `synth_holes` runs
it over a batch of examples (all at once) and `synth_attr_grammar` drives it
incrementally, freezing bodies that already work and evicting them when a later
example refutes them.
"""

# Import Libraries
import itertools
import json
import logging
from collections import ChainMap, Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from synth_files.dsl import (
    BankEntry,
    DslExpr,
    DslGrammar,
    ExprBank,
    apply_vec,
    const,
    entry_kind,
    sample_envs,
)
from synth_files.errors import AgSynthError, BudgetExhausted, EvalError, ExampleError, SketchError, ThrashingError
from synth_files.evaluator import (
    TBuiltin,
    TConst,
    THole,
    Trace,
    TraceExpr,
    TVar,
    eval_concrete,
    eval_trace,
    eval_trace_expr,
    gen_trace,
)
from synth_files.grammar import HoleDecl, Sketch, prod_holes, sketchy_prods
from synth_files.parser import ParseTree, leaves, parse_text, prod_set
from synth_files.synth_states import SynthesisBudget
from synth_files.values import SCALAR_OPS, Bool, Dual, Int, Real, Value, close, show_value, value_eq, value_to_json

logger = logging.getLogger(__name__)

ReadySet = Dict[str, DslExpr]

ENV_SAMPLES = 6
_EVAL_ERRORS = (EvalError, OverflowError, TypeError, ValueError, ZeroDivisionError)
# builtins that let the dual part of a value flow into its real part
_MIXING = frozenset({"du", "ite", "eq", "lt", "le"})
_INVERTIBLE = frozenset({"add", "sub", "mul", "div", "neg"})
_ZERO = const(0.0)


@dataclass(frozen=True)
class Example:
    """An input string, its context and the intended value.

    Attributes:
        input (str): Example string.
        context (tuple): (variable, Value) pairs sorted by name.
        output (Value): Expected value.
    """

    input: str
    context: Tuple[Tuple[str, Value], ...]
    output: Value

    @classmethod
    def of(cls, input: str, context: Mapping[str, Value], output: Value) -> "Example":
        return cls(input, tuple(sorted(context.items())), output)

    @property
    def beta(self) -> Dict[str, Value]:
        return dict(self.context)

    def context_json(self) -> str:
        return json.dumps({k: value_to_json(v) for k, v in self.context}, sort_keys=True)

    def __str__(self) -> str:
        binds = ", ".join(f"{k}={show_value(v)}" for k, v in self.context)
        return f"{self.input} {{{binds}}}"


@dataclass(frozen=True)
class Constraint:
    trace: Trace
    expected: Value
    tol: float = 1e-6
    example: Optional[Example] = None


@dataclass
class SynthOutcome:
    """Result of one synthesize call.

    Attributes:
        bindings (Optional[dict]): Bodies for the open holes, or None.
        status (str): "ok", "unsat" (no binding within the size bound) or "budget".
        candidates (int): Candidates examined.
    """

    bindings: Optional[Dict[str, DslExpr]]
    status: str
    candidates: int = 0

    @property
    def ok(self) -> bool:
        return self.bindings is not None


@dataclass
class SynthResult:
    """Result of a whole synthesis run.

    Attributes:
        ready (Optional[dict]): Final bodies per hole, or None on failure.
        status (str): "ok", "unsat" or "budget".
        refutations (int): Times frozen bodies were evicted.
        candidates (int): Candidates examined over all synthesize calls.
        evictions (Counter): Evictions per hole.
        iterations (int): Loop iterations.
        failed (Optional[Example]): Example being handled when the run failed.
    """

    ready: Optional[Dict[str, DslExpr]]
    status: str
    refutations: int = 0
    candidates: int = 0
    evictions: Counter = field(default_factory=Counter)
    iterations: int = 0
    failed: Optional[Example] = None

    @property
    def ok(self) -> bool:
        return self.ready is not None


class _Unsat(Exception):
    pass


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.count = 0

    def tick(self) -> None:
        self.count += 1
        if self.count > self.limit:
            raise BudgetExhausted(f"more than {self.limit} candidates examined")


# Partial evaluation


@dataclass
class _Residual:
    """Symbolic remainder of a constraint once concrete steps are folded."""

    steps: List[Tuple[int, TraceExpr]]
    out: int
    expected: Value
    tol: float
    holes: frozenset
    sigs: Mapping
    ops: frozenset

    def root(self) -> TraceExpr:
        for var, rhs in self.steps:
            if var == self.out:
                return rhs
        raise AssertionError("out is not a symbolic step")


def _fold(e: TraceExpr, env: Mapping[int, Value]) -> TraceExpr:
    if isinstance(e, TVar):
        return TConst(env[e.id]) if e.id in env else e
    if isinstance(e, TBuiltin):
        return TBuiltin(e.op, tuple(_fold(a, env) for a in e.args))
    if isinstance(e, THole):
        return THole(e.hole, tuple(_fold(a, env) for a in e.args))
    return e


def _nodes(e: TraceExpr) -> Iterator[TraceExpr]:
    yield e
    if isinstance(e, (TBuiltin, THole)):
        for a in e.args:
            yield from _nodes(a)


def _concrete(e: TraceExpr, frozen: Mapping[str, DslExpr]) -> bool:
    for n in _nodes(e):
        if isinstance(n, TVar) or (isinstance(n, THole) and n.hole not in frozen):
            return False
    return True


def _residual(c: Constraint, frozen: Mapping[str, DslExpr]) -> Optional[_Residual]:
    """Fold everything that does not depend on an open hole.

    Returns:
        Optional[_Residual]: None when the constraint already holds.

    Raises:
        _Unsat: When the concrete part fails or contradicts the expected value.
    """
    env: Dict[int, Value] = {}
    steps = []
    for st in c.trace.steps:
        rhs = _fold(st.rhs, env)
        if _concrete(rhs, frozen):
            try:
                env[st.var] = eval_trace_expr(rhs, {}, frozen, c.trace.sigs)
            except _EVAL_ERRORS as e:
                raise _Unsat(f"concrete step x{st.var} fails: {e}") from None
        else:
            steps.append((st.var, rhs))
    if c.trace.out in env:
        if value_eq(env[c.trace.out], c.expected, c.tol):
            return None
        raise _Unsat(f"output fixed to {env[c.trace.out]}, expected {c.expected}")
    holes = frozenset(n.hole for _, rhs in steps for n in _nodes(rhs) if isinstance(n, THole) and n.hole not in frozen)
    ops = frozenset(n.op for _, rhs in steps for n in _nodes(rhs) if isinstance(n, TBuiltin))
    return _Residual(steps, c.trace.out, c.expected, c.tol, holes, c.trace.sigs, ops)


def _run(r: _Residual, bodies: Mapping[str, DslExpr]) -> Value:
    env: Dict[int, Value] = {}
    for var, rhs in r.steps:
        env[var] = eval_trace_expr(rhs, env, bodies, r.sigs)
    return env[r.out]


class _Checker:
    """Decides a candidate against a list of residuals; a failing residual moves to the front."""

    def __init__(self, residuals: Sequence[_Residual], frozen, budget: _Budget, re_only: bool = False):
        self.residuals = list(residuals)
        self.frozen = frozen
        self.budget = budget
        self.re_only = re_only

    def __call__(self, cand: Mapping[str, DslExpr]) -> bool:
        self.budget.tick()
        bodies = ChainMap(cand, self.frozen)
        for i, r in enumerate(self.residuals):
            if not self._holds(r, bodies):
                if i:
                    self.residuals.insert(0, self.residuals.pop(i))
                return False
        return True

    def _holds(self, r: _Residual, bodies) -> bool:
        try:
            v = _run(r, bodies)
        except _EVAL_ERRORS:
            return False
        if self.re_only:
            return isinstance(v, Dual) and close(v.re, r.expected.re, r.tol)
        return value_eq(v, r.expected, r.tol)


# Per-hole search spaces


def _matches(x, t, tol: float) -> bool:
    if x is None:
        return False
    if type(t) is float:
        return type(x) is not bool and close(float(x), t, tol)
    return type(x) is type(t) and x == t


def _key(x):
    if type(x) is float:
        return 0.0 if abs(x) < 1e-9 else float(f"{x:.9g}")
    return x


def _invert(op: str, v1, t):
    """Value e2 must take so that op(v1, e2) == t, or None."""
    if v1 is None:
        return None
    ints = type(v1) is int and type(t) is int
    if op == "add":
        return t - v1
    if op == "sub":
        return v1 - t
    if op == "mul":
        if v1 == 0 or (ints and t % v1):
            return None
        return t // v1 if ints else t / v1
    if op == "div":
        if t == 0 or ints:
            return None
        return v1 / t
    return None


class _Component:
    """Size levels of one scalar body: a whole body or one part of a Dual.

    Entries are bank levels filtered by the target values the body must take at
    some environments. With targets, sizes above the bank level are searched as
    op(e1, e2) over bank entries by inverting op against the target; `truncated`
    records that such a level was cut short. Exhaustive levels are the full bank
    level at every size.
    """

    def __init__(self, bank: ExprBank, nt: str, targets: Mapping[int, object], bank_size: int, tol: float):
        self.bank = bank
        self.nt = nt
        self.targets = dict(targets)
        self.order = sorted(self.targets)
        self.bank_size = bank_size
        self.tol = tol
        self.levels: Dict[Tuple[int, bool], List[BankEntry]] = {}
        self.indexes: Dict[Tuple[str, int], Dict[tuple, List[BankEntry]]] = {}
        self.composed: Set[tuple] = set()
        self.truncated = False

    def hits(self, vec: tuple) -> bool:
        return all(_matches(vec[i], t, self.tol) for i, t in self.targets.items())

    def level(self, size: int, exhaustive: bool = False) -> List[BankEntry]:
        exhaustive = exhaustive or not self.targets or size <= self.bank_size
        key = (size, exhaustive)
        if key not in self.levels:
            if exhaustive:
                entries = [e for e in self.bank.level(self.nt, size) if self.hits(e.vec)]
            else:
                self.truncated = True
                entries = self._composites(size) if size <= 2 * self.bank_size + 1 else []
            self.levels[key] = entries
        return self.levels[key]

    def _index(self, nt: str, size: int) -> Dict[tuple, List[BankEntry]]:
        key = (nt, size)
        if key not in self.indexes:
            index: Dict[tuple, List[BankEntry]] = {}
            for e in self.bank.level(nt, size):
                vals = tuple(e.vec[i] for i in self.order)
                if None not in vals:
                    index.setdefault(tuple(_key(v) for v in vals), []).append(e)
            self.indexes[key] = index
        return self.indexes[key]

    def _composites(self, size: int) -> List[BankEntry]:
        out: List[BankEntry] = []
        for alt in self.bank.grammar.get(self.nt).alternatives:
            if alt.form != "app" or alt.op not in _INVERTIBLE:
                continue
            if alt.op == "neg":
                if size - 1 <= self.bank_size:
                    want = tuple(_key(-self.targets[i]) for i in self.order)
                    for e in self._index(alt.children[0], size - 1).get(want, ()):
                        self._keep(alt.op, (e,), out)
                continue
            left, right = alt.children
            for s1 in range(1, size - 1):
                s2 = size - 1 - s1
                if s1 > self.bank_size or s2 > self.bank_size:
                    continue
                index = self._index(right, s2)
                if not index:
                    continue
                for e1 in self.bank.level(left, s1):
                    want = [_invert(alt.op, e1.vec[i], self.targets[i]) for i in self.order]
                    if None in want:
                        continue
                    for e2 in index.get(tuple(_key(v) for v in want), ()):
                        self._keep(alt.op, (e1, e2), out)
        return out

    def _keep(self, op: str, kids: Tuple[BankEntry, ...], out: List[BankEntry]) -> None:
        vec = apply_vec(SCALAR_OPS[op], [k.vec for k in kids])
        if vec in self.composed or vec in self.bank.seen[self.nt] or not self.hits(vec):
            return
        self.composed.add(vec)
        expr = DslExpr(op, tuple(k.expr for k in kids), kind=self.bank.grammar.get(self.nt).kind)
        out.append(BankEntry(expr, vec, frozenset().union(*(k.params for k in kids))))


def _target_scalar(ret: str, v: Value):
    """Raw scalar (or (re, du) pair) a body of kind `ret` must return to equal v."""
    if ret == "dual" and isinstance(v, Dual):
        return (v.re, v.du)
    if ret == "real" and isinstance(v, Real):
        return v.r
    if ret == "int" and isinstance(v, Int):
        return v.i
    if ret == "bool" and isinstance(v, Bool):
        return v.b
    return None


class _HoleSpace:
    """Candidate bodies of one open hole, by size."""

    def __init__(
        self,
        name: str,
        decl: HoleDecl,
        grammar: DslGrammar,
        residuals: Sequence[_Residual],
        budget: SynthesisBudget,
        index: int,
        tol: float,
    ):
        self.name = name
        self.sig = decl.signature
        self.nt = entry_kind(grammar, decl.entry, self.sig)
        self.dual = self.sig.ret == "dual"
        envs, targets = self._call_sites(residuals)
        samples = sample_envs(self.sig, ENV_SAMPLES, budget.seed + 101 * index)
        envs = samples + envs
        targets = {len(samples) + i: t for i, t in targets.items()}
        max_work = 4 * budget.max_candidates
        if self.dual:
            re_bank = ExprBank(grammar, self.sig, envs, exclude=self.sig.dual_parts, max_work=max_work)
            du_bank = ExprBank(grammar, self.sig, envs, max_work=max_work)
            self.re = _Component(re_bank, self.nt, {i: t[0] for i, t in targets.items()}, budget.bank_size, tol)
            self.du = _Component(du_bank, self.nt, {i: t[1] for i, t in targets.items()}, budget.bank_size, tol)
        else:
            bank = ExprBank(grammar, self.sig, envs, max_work=max_work)
            self.body = _Component(bank, self.nt, targets, budget.bank_size, tol)
        self.min_size = 3 if self.dual else 1
        logger.debug("hole %s: %d call sites, %d targets", name, len(envs) - len(samples), len(targets))

    def _call_sites(self, residuals: Sequence[_Residual]):
        envs: List[Dict[str, object]] = []
        seen: Dict[tuple, int] = {}
        targets: Dict[int, object] = {}
        for r in residuals:
            root = r.root()
            for _, rhs in r.steps:
                for n in _nodes(rhs):
                    if not (isinstance(n, THole) and n.hole == self.name):
                        continue
                    if not all(isinstance(a, TConst) and not isinstance(a.value, str) for a in n.args):
                        continue
                    try:
                        env = self.sig.bind([a.value for a in n.args])
                    except EvalError:
                        continue
                    key = tuple(env[name] for name, _ in self.sig.names)
                    if key not in seen:
                        seen[key] = len(envs)
                        envs.append(env)
                    if n is not root:
                        continue
                    want = _target_scalar(self.sig.ret, r.expected)
                    if want is None:
                        raise _Unsat(f"{self.name} returns {self.sig.ret}, expected {r.expected}")
                    i = seen[key]
                    if i in targets and not self._same(targets[i], want, r.tol):
                        raise _Unsat(f"{self.name} must return two values on one input")
                    targets[i] = want
        return envs, targets

    def _same(self, a, b, tol: float) -> bool:
        if self.dual:
            return close(a[0], b[0], tol) and close(a[1], b[1], tol)
        return _matches(a, b, tol)

    @property
    def truncated(self) -> bool:
        parts = (self.re, self.du) if self.dual else (self.body,)
        return any(p.truncated for p in parts)

    def full(self, size: int, exhaustive: bool = False) -> List[DslExpr]:
        if not self.dual:
            return [e.expr for e in self.body.level(size, exhaustive)]
        out = []
        for rs in range(1, size - 1):
            for r in self.re.level(rs, exhaustive):
                for d in self.du.level(size - 1 - rs, exhaustive):
                    out.append(DslExpr("Dual", (r.expr, d.expr), kind="dual"))
        return out

    def real_part(self, size: int, exhaustive: bool = False) -> List[DslExpr]:
        return [DslExpr("Dual", (r.expr, _ZERO), kind="dual") for r in self.re.level(size, exhaustive)]

    def dual_part(self, re: DslExpr, size: int, exhaustive: bool = False) -> List[DslExpr]:
        return [DslExpr("Dual", (re, d.expr), kind="dual") for d in self.du.level(size, exhaustive)]


# Joint search


def _splits(total: int, lo: Sequence[int], hi: Sequence[int]) -> Iterator[Tuple[int, ...]]:
    """Per-hole sizes summing to total within [lo, hi], lexicographic."""
    if len(lo) == 1:
        if lo[0] <= total <= hi[0]:
            yield (total,)
        return
    rest_lo, rest_hi = sum(lo[1:]), sum(hi[1:])
    for k in range(max(lo[0], total - rest_hi), min(hi[0], total - rest_lo) + 1):
        for tail in _splits(total - k, lo[1:], hi[1:]):
            yield (k,) + tail


def _joint(
    holes: Sequence[str],
    pool: Callable[[str, int], List[DslExpr]],
    lo: Sequence[int],
    hi: Sequence[int],
    check: Callable[[Mapping[str, DslExpr]], bool],
    total: Optional[int] = None,
) -> Iterator[Dict[str, DslExpr]]:
    """Yield bindings passing check, by ascending total size then per-hole order.

    With `total`, only bindings of exactly that total size are tried.
    """
    totals = range(sum(lo), sum(hi) + 1) if total is None else [total]
    for total in totals:
        for sizes in _splits(total, lo, hi):
            pools = []
            for h, k in zip(holes, sizes):
                p = pool(h, k)
                if not p:
                    break
                pools.append(p)
            else:
                for combo in itertools.product(*pools):
                    cand = dict(zip(holes, combo))
                    if check(cand):
                        yield cand


class _Search:
    def __init__(self, residuals, spaces: Dict[str, _HoleSpace], frozen, budget: _Budget, max_size: int, verify):
        self.residuals = residuals
        self.spaces = spaces
        self.holes = sorted(spaces)
        self.frozen = frozen
        self.budget = budget
        self.max_size = max_size
        self.verify = verify
        self.unary = {h: [r for r in residuals if r.holes == {h}] for h in self.holes}
        self.shared = [r for r in residuals if len(r.holes) > 1]

    def _filtered(self, cache: dict, key, hole: str, bodies: List[DslExpr], re_only: bool) -> List[DslExpr]:
        if key not in cache:
            check = _Checker(self.unary[hole], self.frozen, self.budget, re_only)
            cache[key] = [b for b in bodies if not self.unary[hole] or check({hole: b})]
        return cache[key]

    def _final(self, re_only: bool = False):
        check = _Checker(self.shared, self.frozen, self.budget, re_only)
        if re_only:
            return check
        return lambda cand: check(cand) and self.verify(cand)

    def separable(self) -> bool:
        if not all(sp.dual for sp in self.spaces.values()):
            return False
        for r in self.residuals:
            if not isinstance(r.expected, Dual) or r.ops & _MIXING:
                return False
            for _, rhs in r.steps:
                for n in _nodes(rhs):
                    if isinstance(n, THole) and n.hole in self.frozen and not _real_part_clean(self.frozen[n.hole], r.sigs[n.hole]):
                        return False
        return True

    def single_phase(self, exhaustive: bool = False) -> Optional[Dict[str, DslExpr]]:
        cache: dict = {}
        lo = [self.spaces[h].min_size for h in self.holes]
        hi = [self.max_size] * len(self.holes)
        pool = lambda h, k: self._filtered(cache, (h, k), h, self.spaces[h].full(k, exhaustive), False)
        return next(_joint(self.holes, pool, lo, hi, self._final()), None)

    def two_phase(self, exhaustive: bool = False) -> Optional[Dict[str, DslExpr]]:
        """Real parts first, then dual parts per real-part solution.

        A whole binding of total size T has real parts summing to t and dual
        parts summing to T - n - t, so T is walked upwards and, within T, real
        solutions of every t <= T - 2n are completed by dual parts of exactly the
        remaining size. The first binding found is minimal in total size.
        """
        if self.max_size < 3:
            return None
        n = len(self.holes)
        re_cache: dict = {}
        du_cache: dict = {}
        re_pool = lambda h, k: self._filtered(re_cache, (h, k), h, self.spaces[h].real_part(k, exhaustive), True)
        re_check = self._final(re_only=True)
        re_lo, re_hi = [1] * n, [self.max_size - 2] * n
        solved: List[Tuple[int, Dict[str, DslExpr]]] = []
        for total in range(3 * n, n * self.max_size + 1):
            t = total - 2 * n
            if t <= sum(re_hi):
                for partial in _joint(self.holes, re_pool, re_lo, re_hi, re_check, total=t):
                    reals = {h: partial[h].args[0] for h in self.holes}
                    logger.debug("real parts found: %s", {h: str(e) for h, e in reals.items()})
                    solved.append((t, reals))
            for rt, reals in solved:
                hi = [self.max_size - 1 - reals[h].size for h in self.holes]
                rest = total - n - rt
                if rest > sum(hi):
                    continue

                def du_pool(h, k, reals=reals):
                    return self._filtered(du_cache, (h, reals[h], k), h, self.spaces[h].dual_part(reals[h], k, exhaustive), False)

                found = next(_joint(self.holes, du_pool, [1] * n, hi, self._final(), total=rest), None)
                if found is not None:
                    return found
        return None


def _real_part_clean(body: DslExpr, sig) -> bool:
    if body.op == "Dual":
        return not (body.args[0].params() & sig.dual_parts)
    return not (body.params() & sig.dual_parts)


def synthesize(
    constraints: Iterable[Constraint],
    grammar: DslGrammar,
    decls: Mapping[str, HoleDecl],
    frozen: Optional[Mapping[str, DslExpr]] = None,
    budget: Optional[SynthesisBudget] = None,
    reject: Optional[Callable[[Mapping[str, DslExpr]], bool]] = None,
    exhaustive: bool = True,
) -> SynthOutcome:
    """Find bodies for the open holes so that every constraint holds.

    Holes bound in `frozen` are never rebound. Bodies are searched by ascending
    total size. When every open hole returns a dual and no trace lets dual parts
    flow into real parts, the real parts are searched first and the dual parts
    per real-part solution; otherwise whole bodies are searched jointly.

    The first pass builds bodies above the bank size only by inverting the
    operator at their root. If it finds nothing and some level was cut short,
    a second pass searches the full bank levels, so "unsat" is only reported
    after every body within `max_size` was considered.

    Args:
        constraints (Iterable[Constraint]): Constraints to satisfy.
        grammar (DslGrammar): Candidate-body grammar.
        decls (Mapping[str, HoleDecl]): Declaration per hole (signature and entry).
        frozen (Optional[Mapping]): Bodies of holes that stay fixed.
        budget (Optional[SynthesisBudget]): Search bounds.
        reject (Optional[Callable]): Bindings for which this returns True are
            skipped even when they satisfy every constraint.
        exhaustive (bool): Run the full-bank pass when the first pass fails;
            without it a failed search reports "budget", never "unsat".

    Returns:
        SynthOutcome: Bindings for the open holes, or None with status "unsat"
            or "budget".

    Raises:
        SketchError: If an open hole has no declaration.
    """
    constraints = list(constraints)
    frozen = dict(frozen or {})
    budget = budget or SynthesisBudget()
    try:
        residuals = [r for r in (_residual(c, frozen) for c in constraints) if r is not None]
    except _Unsat as e:
        logger.info("unsatisfiable before search: %s", e)
        return SynthOutcome(None, "unsat", 0)
    open_holes = sorted(set().union(*(r.holes for r in residuals)))
    if not open_holes:
        return SynthOutcome({}, "ok", 0)
    for h in open_holes:
        if h not in decls:
            raise SketchError(f"no declaration for hole {h}")
    counter = _Budget(budget.max_candidates)
    tol = min(r.tol for r in residuals)

    def verify(cand: Mapping[str, DslExpr]) -> bool:
        if reject is not None and reject(cand):
            return False
        bodies = {**frozen, **cand}
        for c in constraints:
            try:
                ok = value_eq(eval_trace(c.trace, bodies), c.expected, c.tol)
            except _EVAL_ERRORS:
                ok = False
            if not ok:
                logger.warning("candidate passed the folded check but not the trace: %s", c.example)
                return False
        return True

    logger.info("synthesize: open %s, frozen %s, %d constraints", open_holes, sorted(frozen), len(residuals))
    try:
        spaces = {h: _HoleSpace(h, decls[h], grammar, residuals, budget, i, tol) for i, h in enumerate(open_holes)}
        search = _Search(residuals, spaces, frozen, counter, budget.max_size, verify)
        run = search.two_phase if search.separable() else search.single_phase
        found = run()
        truncated = any(sp.truncated for sp in spaces.values())
        if found is None and truncated and exhaustive:
            logger.info("goal-directed pass found nothing after %d candidates, searching full bank levels", counter.count)
            found = run(exhaustive=True)
            truncated = False
    except _Unsat as e:
        logger.info("unsatisfiable: %s", e)
        return SynthOutcome(None, "unsat", counter.count)
    except BudgetExhausted as e:
        logger.info("budget exhausted: %s", e)
        return SynthOutcome(None, "budget", counter.count)
    if found is None and truncated:
        logger.info("no binding from the goal-directed pass after %d candidates", counter.count)
        return SynthOutcome(None, "budget", counter.count)
    if found is None:
        logger.info("no binding within size %d after %d candidates", budget.max_size, counter.count)
        return SynthOutcome(None, "unsat", counter.count)
    logger.info("found %s after %d candidates", {h: str(e) for h, e in found.items()}, counter.count)
    return SynthOutcome(found, "ok", counter.count)


# Examples


class ExampleBook:
    """Parse trees and traces of examples under one sketch, computed once."""

    def __init__(self, s: Sketch):
        self.s = s
        self.sketchy = frozenset(sketchy_prods(s))
        self.trees: Dict[str, ParseTree] = {}
        self.traces: Dict[Example, Trace] = {}

    def tree(self, text: str) -> ParseTree:
        if text not in self.trees:
            try:
                self.trees[text] = parse_text(self.s, text)
            except AgSynthError as e:
                raise ExampleError(text, e) from None
        return self.trees[text]

    def prods(self, text: str) -> frozenset:
        return prod_set(self.tree(text))

    def sketchy_of(self, text: str) -> frozenset:
        return self.prods(text) & self.sketchy

    def holes_of(self, text: str) -> Set[str]:
        out: Set[str] = set()
        for pid in self.sketchy_of(text):
            out |= prod_holes(self.s, pid)
        return out

    def trace(self, ex: Example) -> Trace:
        if ex not in self.traces:
            try:
                self.traces[ex] = gen_trace(self.s, self.tree(ex.input), ex.beta)
            except ExampleError:
                raise
            except AgSynthError as e:
                raise ExampleError(ex.input, e) from None
        return self.traces[ex]

    def key(self, ex: Example) -> tuple:
        return (len(self.sketchy_of(ex.input)), len(leaves(self.tree(ex.input))), ex.input, ex.context_json())

    def passes(self, ex: Example, ready: Mapping[str, DslExpr], tol: float) -> bool:
        try:
            return value_eq(eval_trace(self.trace(ex), ready), ex.output, tol)
        except _EVAL_ERRORS:
            return False


def synth_holes(
    s: Sketch,
    examples: Iterable[Example],
    ready: Optional[Mapping[str, DslExpr]] = None,
    dsl: Optional[DslGrammar] = None,
    budget: Optional[SynthesisBudget] = None,
    tol: float = 1e-6,
    book: Optional[ExampleBook] = None,
    exhaustive: bool = True,
) -> SynthOutcome:
    """Synthesize bodies for every hole the examples reach, with `ready` frozen.

    Raises:
        ExampleError: If an example fails to parse or its concrete part fails to evaluate.
    """
    book = book or ExampleBook(s)
    constraints = [Constraint(book.trace(ex), ex.output, tol, ex) for ex in examples]
    decls = {h.name: h for h in s.holes}
    return synthesize(constraints, dsl or s.dsl, decls, ready or {}, budget, exhaustive=exhaustive)


def derivation_congruent(s: Sketch, w1: str, w2: str) -> bool:
    """True iff the derivations of w1 and w2 use the same set of productions."""
    return prod_set(parse_text(s, w1)) == prod_set(parse_text(s, w2))


def get_sketchy_prods(s: Sketch, w: str) -> Set[int]:
    return set(prod_set(parse_text(s, w))) & sketchy_prods(s)


def select_example(s: Sketch, pending: Iterable[Example], book: Optional[ExampleBook] = None) -> Example:
    """Pick the pending example reaching the fewest sketchy productions.

    Ties go to fewer tokens, then to the smaller input text, then context.
    """
    book = book or ExampleBook(s)
    return min(pending, key=book.key)


def ready_prods(s: Sketch, ready: Mapping[str, DslExpr]) -> Set[int]:
    """Sketchy productions all of whose holes are bound."""
    return {pid for pid in sketchy_prods(s) if prod_holes(s, pid) <= set(ready)}


def _dedupe(examples: Iterable[Example]) -> List[Example]:
    return list(dict.fromkeys(examples))


def all_at_once(
    s: Sketch,
    examples: Iterable[Example],
    dsl: Optional[DslGrammar] = None,
    budget: Optional[SynthesisBudget] = None,
    tol: float = 1e-6,
) -> SynthResult:
    """Synthesize every hole in a single call over all examples."""
    examples = _dedupe(examples)
    out = synth_holes(s, examples, {}, dsl, budget, tol)
    return SynthResult(out.bindings, out.status, 0, out.candidates, iterations=1)


def synth_attr_grammar(
    s: Sketch,
    examples: Iterable[Example],
    dsl: Optional[DslGrammar] = None,
    budget: Optional[SynthesisBudget] = None,
    tol: float = 1e-6,
    debug: bool = False,
) -> SynthResult:
    """Incremental, refutation-guided synthesis.

    Examples are taken easiest first. An example whose holes are all ready is
    only tested; if it fails, the bodies of its holes are evicted and
    resynthesized together with every example passed so far. Otherwise the
    example and its derivation-congruent peers are synthesized with the ready
    bodies frozen; if that fails while some of its holes were ready, those are
    evicted and synthesis is retried.

    Args:
        s (Sketch): Sketch to complete.
        examples (Iterable[Example]): Examples E.
        dsl (Optional[DslGrammar]): Candidate-body grammar, default the sketch's.
        budget (Optional[SynthesisBudget]): Search bounds and refutation cap.
        tol (float): Comparison tolerance.
        debug (bool): Check that the ready bodies pass every accepted example at
            the top of each iteration.

    Returns:
        SynthResult: Ready bodies passing every example, or None with status.

    Raises:
        ExampleError: If an example does not parse or evaluate.
        ThrashingError: If refutations exceed `budget.max_refutations`.
    """
    budget = budget or SynthesisBudget()
    book = ExampleBook(s)
    pending = _dedupe(examples)
    ready: Dict[str, DslExpr] = {}
    accepted: List[Example] = []
    result = SynthResult(None, "ok")

    def evict(holes: Set[str]) -> Set[str]:
        gone = {h for h in holes if h in ready}
        for h in gone:
            del ready[h]
            result.evictions[h] += 1
        return gone

    def refute(gone: Set[str]) -> None:
        result.refutations += 1
        logger.info("refutation %d: evicted %s", result.refutations, sorted(gone))
        if result.refutations > budget.max_refutations:
            raise ThrashingError(dict(result.evictions.most_common()))

    while pending:
        result.iterations += 1
        if debug:
            broken = [str(ex) for ex in accepted if not book.passes(ex, ready, tol)]
            if broken:
                raise AssertionError(f"ready bodies fail accepted examples: {broken}")
        w = select_example(s, pending, book)
        zh = book.holes_of(w.input)
        logger.info("iteration %d: %s, holes %s", result.iterations, w, sorted(zh))
        if zh <= set(ready):
            if book.passes(w, ready, tol):
                accepted.append(w)
                pending.remove(w)
                continue
            gone = evict(zh)
            if gone:
                refute(gone)
            batch = [w]
        else:
            target = book.prods(w.input)
            batch = [ex for ex in pending if book.prods(ex.input) == target]
        frozen_here = bool(zh & set(ready))
        out = synth_holes(s, accepted + batch, ready, dsl, budget, tol, book, exhaustive=not frozen_here)
        result.candidates += out.candidates
        if not out.ok and frozen_here:
            refute(evict(zh))
            out = synth_holes(s, accepted + batch, ready, dsl, budget, tol, book)
            result.candidates += out.candidates
        if not out.ok:
            result.status = out.status
            result.failed = w
            logger.info("no completion for %s (%s)", w, out.status)
            return result
        ready.update(out.bindings)
        accepted.extend(batch)
        pending = [ex for ex in pending if ex not in batch]
    result.ready = dict(ready)
    return result


def check_examples(g: Sketch, examples: Iterable[Example], tol: float = 1e-6) -> List[Tuple[Example, Optional[Value], Optional[str]]]:
    """Replay examples on a hole-free grammar.

    Returns:
        list: (example, value or None, error text or None) per example.
    """
    out = []
    for ex in examples:
        try:
            v = eval_concrete(g, parse_text(g, ex.input), ex.beta)
        except AgSynthError as e:
            out.append((ex, None, str(e)))
            continue
        out.append((ex, v, None if value_eq(v, ex.output, tol) else f"expected {show_value(ex.output)}"))
    return out
