"""Candidate-body language for holes.

A DslGrammar is a small typed expression grammar (int, real and bool
nonterminals plus an optional dual nonterminal `Dual(C, C)`). Bodies are
enumerated bottom-up by size; two expressions whose value vectors agree on every
sample environment are observationally equivalent and only the canonical-first
one is kept.
"""

# Import Libraries
import itertools
import logging
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import pyparsing as pp

from synth_files.errors import BudgetExhausted, EvalError, SketchError
from synth_files.values import (
    SCALAR_OPS,
    Bool,
    Dual,
    Int,
    Real,
    Value,
    kind_of,
    scalar_ite,
)

logger = logging.getLogger(__name__)

SCALAR_KINDS = ("int", "real", "bool")
DEFAULT_LITERALS = (-1, 0, 1, 2)

# op -> (accepted child kinds per position, result kind rule)
_NUMERIC = ("int", "real")


@dataclass(frozen=True)
class Alternative:
    """One right-hand side of a DSL nonterminal.

    Attributes:
        form (str): "param", "lit", "const" or "app".
        value: Constant value for "const".
        op (str): Builtin applied by "app".
        children (tuple): Child nonterminal names for "app".
    """

    form: str
    value: object = None
    op: Optional[str] = None
    children: Tuple[str, ...] = ()

    def show(self) -> str:
        if self.form in ("param", "lit"):
            return self.form
        if self.form == "const":
            return _show_const(self.value)
        return f"{self.op}({', '.join(self.children)})"


@dataclass(frozen=True)
class DslNonterminal:
    name: str
    kind: str
    alternatives: Tuple[Alternative, ...]


@dataclass(frozen=True)
class DslGrammar:
    """Typed DSL grammar with a literal pool.

    Attributes:
        nonterminals (tuple): Declared nonterminals in file order.
        literals (tuple): Integer literal pool, ascending.
    """

    nonterminals: Tuple[DslNonterminal, ...] = ()
    literals: Tuple[int, ...] = DEFAULT_LITERALS

    def get(self, name: str) -> DslNonterminal:
        for nt in self.nonterminals:
            if nt.name == name:
                return nt
        raise KeyError(name)

    def has(self, name: str) -> bool:
        return any(nt.name == name for nt in self.nonterminals)

    def components(self, entry: str) -> Optional[str]:
        """Name of the real nonterminal a dual entry is built from, if any."""
        nt = self.get(entry)
        if nt.kind == "real":
            return nt.name
        if nt.kind == "dual":
            return nt.alternatives[0].children[0]
        return None


def build_grammar(declared: Sequence[Tuple[str, Optional[str], Sequence[Alternative]]], line: Optional[int] = None) -> DslGrammar:
    """Assemble and validate a DslGrammar from parsed `%dsl` declarations.

    Args:
        declared: (name, kind or None, alternatives) per declaration, merged by name.
        line (Optional[int]): Line used in error messages.

    Returns:
        DslGrammar: Validated grammar. A child named `lit` that is not declared
            becomes the implicit int nonterminal `lit ::= lit | param`.

    Raises:
        SketchError: On unknown children, kind errors or unproductive nonterminals.
    """
    order: List[str] = []
    kinds: Dict[str, str] = {}
    alts: Dict[str, List[Alternative]] = {}
    for name, kind, alternatives in declared:
        if name not in alts:
            order.append(name)
            alts[name] = []
            kinds[name] = kind or (name if name in ("int", "real", "bool", "dual") else "real")
        elif kind and kind != kinds[name]:
            raise SketchError(f"DSL nonterminal {name} redeclared with kind {kind}", line)
        alts[name].extend(alternatives)
    children = {c for a in itertools.chain.from_iterable(alts.values()) for c in a.children}
    if "lit" in children and "lit" not in alts:
        order.append("lit")
        kinds["lit"] = "int"
        alts["lit"] = [Alternative("lit"), Alternative("param")]

    literals = set(DEFAULT_LITERALS)
    nts = []
    for name in order:
        kind = kinds[name]
        if kind not in SCALAR_KINDS + ("dual",):
            raise SketchError(f"DSL nonterminal {name} has unsupported kind {kind}", line)
        checked = []
        for alt in alts[name]:
            checked.append(_check_alternative(name, kind, alt, kinds, line))
            if alt.form == "const" and type(alt.value) in (int, float) and float(alt.value).is_integer():
                literals.add(int(alt.value))
        nts.append(DslNonterminal(name, kind, tuple(checked)))
    grammar = DslGrammar(tuple(nts), tuple(sorted(literals)))
    _check_productive(grammar, line)
    return grammar


def _check_alternative(name, kind, alt: Alternative, kinds, line) -> Alternative:
    if kind == "dual":
        if alt.form != "app" or alt.op != "Dual" or len(alt.children) != 2:
            raise SketchError(f"dual nonterminal {name} must be exactly Dual(C, C)", line)
        left, right = alt.children
        if left != right or kinds.get(left) != "real":
            raise SketchError(f"Dual components of {name} must be one real nonterminal", line)
        return alt
    if alt.form == "param":
        return alt
    if alt.form == "lit":
        if kind == "bool":
            raise SketchError(f"bool nonterminal {name} cannot use lit", line)
        return alt
    if alt.form == "const":
        v = alt.value
        if kind == "bool" and type(v) is not bool:
            raise SketchError(f"constant {v!r} is not a bool in {name}", line)
        if kind == "int" and type(v) is not int:
            raise SketchError(f"constant {v!r} is not an int in {name}", line)
        if kind == "real":
            if type(v) is bool:
                raise SketchError(f"constant {v!r} is not a real in {name}", line)
            return Alternative("const", float(v))
        return alt
    for child in alt.children:
        if child not in kinds:
            raise SketchError(f"DSL alternative {alt.show()} of {name} names unknown nonterminal {child}", line)
    result = result_kind(alt.op, [kinds[c] for c in alt.children])
    if result is None or result != kind:
        raise SketchError(f"DSL alternative {alt.show()} does not produce a {kind} in {name}", line)
    return alt


def result_kind(op: str, child_kinds: Sequence[str]) -> Optional[str]:
    """Static result kind of a DSL builtin, or None when ill-typed."""
    n = len(child_kinds)
    if op in ("add", "sub", "mul", "div") and n == 2 and all(k in _NUMERIC for k in child_kinds):
        return "int" if all(k == "int" for k in child_kinds) else "real"
    if op == "neg" and n == 1 and child_kinds[0] in _NUMERIC:
        return child_kinds[0]
    if op in ("sin", "cos", "exp", "log") and n == 1 and child_kinds[0] in _NUMERIC:
        return "real"
    if op == "pow" and n == 2 and child_kinds[0] in _NUMERIC and child_kinds[1] == "int":
        return child_kinds[0]
    if op == "real" and n == 1 and child_kinds[0] == "int":
        return "real"
    if op in ("eq", "lt", "le") and n == 2 and all(k in _NUMERIC for k in child_kinds):
        return "bool"
    if op == "ite" and n == 3 and child_kinds[0] == "bool" and child_kinds[1] == child_kinds[2]:
        return child_kinds[1]
    if op == "Dual" and n == 2 and all(k in _NUMERIC for k in child_kinds):
        return "dual"
    return None


def _check_productive(grammar: DslGrammar, line) -> None:
    productive = set()
    changed = True
    while changed:
        changed = False
        for nt in grammar.nonterminals:
            if nt.name in productive:
                continue
            for alt in nt.alternatives:
                if alt.form in ("lit", "const") or (alt.form == "app" and all(c in productive for c in alt.children)):
                    productive.add(nt.name)
                    changed = True
                    break
    # param-only nonterminals depend on the hole signature and are checked per hole
    for nt in grammar.nonterminals:
        if nt.name not in productive and not any(a.form == "param" for a in nt.alternatives):
            raise SketchError(f"DSL nonterminal {nt.name} derives no finite expression", line)


# Signatures


@dataclass(frozen=True)
class HoleSignature:
    """Parameter and return kinds of a hole plus the DSL names it exposes.

    A dual parameter k is destructured into real names a_k and d_k; any other
    parameter k is exposed as a_k with its own kind.
    """

    params: Tuple[str, ...]
    ret: str
    names: Tuple[Tuple[str, str], ...] = field(init=False)

    def __post_init__(self):
        names = []
        for k, kind in enumerate(self.params, start=1):
            if kind == "dual":
                names += [(f"a_{k}", "real"), (f"d_{k}", "real")]
            else:
                names.append((f"a_{k}", kind))
        object.__setattr__(self, "names", tuple(names))

    @property
    def dual_parts(self) -> frozenset:
        return frozenset(f"d_{k}" for k, kind in enumerate(self.params, start=1) if kind == "dual")

    def bind(self, args: Sequence[Value]) -> Dict[str, object]:
        """Destructure argument values into a scalar environment.

        Raises:
            EvalError: On arity or kind mismatch.
        """
        if len(args) != len(self.params):
            raise EvalError(f"hole expects {len(self.params)} arguments, got {len(args)}")
        env = {}
        for k, (kind, v) in enumerate(zip(self.params, args), start=1):
            if kind == "dual":
                if isinstance(v, Dual):
                    env[f"a_{k}"], env[f"d_{k}"] = v.re, v.du
                elif isinstance(v, (Int, Real)):
                    env[f"a_{k}"], env[f"d_{k}"] = float(_scalar(v)), 0.0
                else:
                    raise EvalError(f"argument {k} must be dual, got {kind_of(v)}")
            elif kind == "real":
                if not isinstance(v, (Int, Real)):
                    raise EvalError(f"argument {k} must be real, got {kind_of(v)}")
                env[f"a_{k}"] = float(_scalar(v))
            elif kind == "int":
                if not isinstance(v, Int):
                    raise EvalError(f"argument {k} must be int, got {kind_of(v)}")
                env[f"a_{k}"] = v.i
            elif kind == "bool":
                if not isinstance(v, Bool):
                    raise EvalError(f"argument {k} must be bool, got {kind_of(v)}")
                env[f"a_{k}"] = v.b
            else:
                raise EvalError(f"unsupported parameter kind {kind}")
        return env

    def wrap(self, result) -> Value:
        """Turn a raw body result into a Value of the return kind."""
        if self.ret == "dual":
            if not isinstance(result, tuple):
                raise EvalError("dual hole body must build Dual(re, du)")
            re, du = result
            if type(re) is bool or type(du) is bool:
                raise EvalError("Dual components must be numbers")
            return Dual(re, du)
        if self.ret == "real" and type(result) in (int, float):
            return Real(float(result))
        if self.ret == "int" and type(result) is int:
            return Int(result)
        if self.ret == "bool" and type(result) is bool:
            return Bool(result)
        raise EvalError(f"hole body result does not match return kind {self.ret}")


def _scalar(v: Value):
    return v.i if isinstance(v, Int) else v.r


# Expressions


@dataclass(frozen=True, slots=True)
class DslExpr:
    """A candidate body node.

    Attributes:
        op (str): "const", "param", "Dual" or a builtin name.
        args (tuple): Child expressions.
        value: Constant payload for "const".
        name (str): Parameter name for "param".
        kind (str): Static result kind.
        size (int): Node count.
    """

    op: str
    args: Tuple["DslExpr", ...] = ()
    value: object = None
    name: Optional[str] = None
    kind: str = "real"
    size: int = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "size", 1 + sum(a.size for a in self.args))

    def params(self) -> frozenset:
        if self.op == "param":
            return frozenset([self.name])
        return frozenset().union(*(a.params() for a in self.args))

    def __str__(self) -> str:
        return show_expr(self)


def const(value, kind: Optional[str] = None) -> DslExpr:
    if kind is None:
        kind = "bool" if type(value) is bool else "int" if type(value) is int else "real"
    if kind == "real":
        value = float(value)
    return DslExpr("const", value=value, kind=kind)


def param(name: str, kind: str = "real") -> DslExpr:
    return DslExpr("param", name=name, kind=kind)


def app(op: str, *args: DslExpr) -> DslExpr:
    kind = result_kind(op, [a.kind for a in args])
    if kind is None:
        raise SketchError(f"ill-typed DSL application {op}({', '.join(a.kind for a in args)})")
    return DslExpr(op, tuple(args), kind=kind)


def _show_const(v) -> str:
    if type(v) is bool:
        return "true" if v else "false"
    return repr(v)


def show_expr(e: DslExpr) -> str:
    """Pretty-print a body, e.g. Dual(add(a_1, a_2), add(d_1, d_2))."""
    if e.op == "const":
        return _show_const(e.value)
    if e.op == "param":
        return e.name
    return f"{e.op}({', '.join(show_expr(a) for a in e.args)})"


_pp_expr = pp.Forward()
_pp_name = pp.Word(pp.alphas + "_", pp.alphanums + "_")
_pp_number = pp.Regex(r"-?\d+(\.\d*)?([eE][-+]?\d+)?")
_pp_call = pp.Group(_pp_name + pp.Suppress("(") + pp.Group(pp.Opt(pp.DelimitedList(_pp_expr))) + pp.Suppress(")"))
_pp_expr <<= _pp_number | _pp_call | _pp_name


def parse_expr(text: str, sig: HoleSignature) -> DslExpr:
    """Parse the printed form of a body against a signature.

    Raises:
        SketchError: On syntax errors, unknown names or ill-typed applications.
    """
    try:
        tree = _pp_expr.parse_string(text, parse_all=True)[0]
    except pp.ParseException as e:
        raise SketchError(f"bad DSL expression {text!r}: {e}") from None
    kinds = dict(sig.names)

    def build(node) -> DslExpr:
        if isinstance(node, str):
            if node in ("true", "false"):
                return const(node == "true")
            if node[0].isdigit() or node[0] == "-":
                return const(float(node) if any(c in node for c in ".eE") else int(node))
            if node not in kinds:
                raise SketchError(f"unknown parameter {node} in {text!r}")
            return param(node, kinds[node])
        op, args = node[0], node[1]
        return app(op, *(build(a) for a in args))

    return build(tree)


# Evaluation


@lru_cache(maxsize=1 << 16)
def compile_expr(e: DslExpr) -> Callable[[Mapping[str, object]], object]:
    """Compile a body into a closure over a scalar environment.

    A Dual node returns the pair (re, du); every other node returns a scalar.
    """
    if e.op == "const":
        v = e.value
        return lambda env: v
    if e.op == "param":
        name = e.name

        def read(env):
            try:
                return env[name]
            except KeyError:
                raise EvalError(f"unbound DSL name {name}") from None

        return read
    fs = tuple(compile_expr(a) for a in e.args)
    if e.op == "Dual":
        f, g = fs
        return lambda env: (f(env), g(env))
    if e.op == "ite":
        c, x, y = fs
        return lambda env: scalar_ite(c(env), x(env), y(env))
    fn = SCALAR_OPS[e.op]
    if len(fs) == 1:
        (f,) = fs
        return lambda env: fn(f(env))
    f, g = fs
    return lambda env: fn(f(env), g(env))


def eval_expr(e: DslExpr, env: Mapping[str, Value]) -> Value:
    """Evaluate a body over named scalar Values.

    Args:
        e (DslExpr): Body to evaluate.
        env (Mapping[str, Value]): Int, Real or Bool per DSL name.

    Returns:
        Value: Dual for a Dual node, else the scalar wrapped by kind.

    Raises:
        EvalError: On domain errors.
    """
    scalars = {}
    for name, v in env.items():
        if isinstance(v, Int):
            scalars[name] = v.i
        elif isinstance(v, Real):
            scalars[name] = v.r
        elif isinstance(v, Bool):
            scalars[name] = v.b
        else:
            raise EvalError(f"DSL name {name} must be bound to a scalar")
    result = compile_expr(e)(scalars)
    if isinstance(result, tuple):
        return Dual(*result)
    if e.kind == "real" and type(result) is int:
        result = float(result)
    if type(result) is bool:
        return Bool(result)
    return Int(result) if type(result) is int else Real(result)


def eval_body(e: DslExpr, sig: HoleSignature, args: Sequence[Value]) -> Value:
    """Run a hole body on argument values."""
    return sig.wrap(compile_expr(e)(sig.bind(args)))


def check_body(e: DslExpr, sig: HoleSignature) -> None:
    """Type-check a body against a signature.

    Raises:
        SketchError: On unknown names or a return kind mismatch.
    """
    names = dict(sig.names)
    for name in e.params():
        if name not in names:
            raise SketchError(f"body uses {name}, not a parameter of the hole")
    ok = e.kind == sig.ret or (sig.ret == "real" and e.kind == "int")
    if not ok:
        raise SketchError(f"body of kind {e.kind} does not match return kind {sig.ret}")


# Enumeration


def sample_envs(sig: HoleSignature, count: int, seed: int) -> List[Dict[str, object]]:
    """Seeded random scalar environments for a signature.

    Reals are drawn from [-3, 3] away from zero, ints from [-4, 4] and bools
    alternate so both values occur.
    """
    rng = random.Random(seed)
    envs = []
    for j in range(count):
        env = {}
        for name, kind in sig.names:
            if kind == "real":
                env[name] = round(rng.choice((-1, 1)) * rng.uniform(0.25, 3.0), 4)
            elif kind == "int":
                env[name] = rng.randint(-4, 4)
            else:
                env[name] = (j + len(env)) % 2 == 0
        envs.append(env)
    return envs


class BankEntry:
    __slots__ = ("expr", "vec", "params")

    def __init__(self, expr: DslExpr, vec: tuple, params: frozenset):
        self.expr = expr
        self.vec = vec
        self.params = params


class ExprBank:
    """Size levels of observationally distinct expressions for every nonterminal.

    Attributes:
        grammar (DslGrammar): Grammar being enumerated.
        sig (HoleSignature): Names available to `param` alternatives.
        envs (list): Sample environments; vectors hold one value per env (None on error).
        exclude (frozenset): Parameter names withheld from `param`.
        max_work (Optional[int]): Raw candidates allowed before BudgetExhausted.
    """

    def __init__(
        self,
        grammar: DslGrammar,
        sig: HoleSignature,
        envs: Sequence[Mapping[str, object]],
        exclude: frozenset = frozenset(),
        max_work: Optional[int] = None,
    ):
        if not envs:
            raise ValueError("sample_envs must be nonempty")
        self.grammar = grammar
        self.sig = sig
        self.envs = list(envs)
        self.exclude = exclude
        self.max_work = max_work
        self.work = 0
        self.levels: Dict[str, List[List[BankEntry]]] = {nt.name: [[]] for nt in grammar.nonterminals}
        self.seen: Dict[str, set] = {nt.name: set() for nt in grammar.nonterminals}

    @property
    def built(self) -> int:
        return len(next(iter(self.levels.values()))) - 1 if self.levels else 0

    def level(self, nt: str, size: int) -> List[BankEntry]:
        """Entries of exactly `size` nodes for nonterminal `nt`, in canonical order."""
        while self.built < size:
            self._grow()
        return self.levels[nt][size]

    def upto(self, nt: str, size: int) -> Iterator[BankEntry]:
        for s in range(1, size + 1):
            yield from self.level(nt, s)

    def _grow(self) -> None:
        size = self.built + 1
        fresh = {}
        for nt in self.grammar.nonterminals:
            if nt.kind == "dual":
                fresh[nt.name] = []
                continue
            raw = self._atoms(nt) if size == 1 else self._apps(nt, size)
            fresh[nt.name] = self._dedup(nt.name, raw)
        for name, entries in fresh.items():
            self.levels[name].append(entries)
        logger.debug("bank level %d: %s", size, {k: len(v) for k, v in fresh.items()})

    def _atoms(self, nt: DslNonterminal) -> List[BankEntry]:
        out = []
        n = len(self.envs)
        for alt in nt.alternatives:
            if alt.form == "param":
                for name, kind in self.sig.names:
                    if kind == nt.kind and name not in self.exclude:
                        vec = tuple(env[name] for env in self.envs)
                        out.append(BankEntry(param(name, kind), vec, frozenset([name])))
            elif alt.form == "lit":
                for lit in self.grammar.literals:
                    v = float(lit) if nt.kind == "real" else lit
                    out.append(BankEntry(const(v, nt.kind), (v,) * n, frozenset()))
            elif alt.form == "const":
                out.append(BankEntry(const(alt.value, nt.kind), (alt.value,) * n, frozenset()))
        return out

    def _apps(self, nt: DslNonterminal, size: int) -> List[BankEntry]:
        out = []
        for alt in nt.alternatives:
            if alt.form != "app":
                continue
            fn = SCALAR_OPS[alt.op]
            k = len(alt.children)
            for parts in _compositions(size - 1, k):
                pools = [self.levels[c][s] for c, s in zip(alt.children, parts)]
                if any(not p for p in pools):
                    continue
                self.work += _product_size(pools)
                if self.max_work is not None and self.work > self.max_work:
                    raise BudgetExhausted(f"expression bank exceeded {self.max_work} candidates")
                for kids in itertools.product(*pools):
                    vec = apply_vec(fn, [e.vec for e in kids])
                    expr = DslExpr(alt.op, tuple(e.expr for e in kids), kind=nt.kind)
                    out.append(BankEntry(expr, vec, frozenset().union(*(e.params for e in kids))))
        return out

    def _dedup(self, name: str, raw: List[BankEntry]) -> List[BankEntry]:
        order = sorted(range(len(raw)), key=lambda i: (-len(raw[i].params), i))
        seen = self.seen[name]
        kept = []
        for i in order:
            entry = raw[i]
            if entry.vec in seen or all(v is None for v in entry.vec):
                continue
            seen.add(entry.vec)
            kept.append(entry)
        return kept


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _product_size(pools) -> int:
    n = 1
    for p in pools:
        n *= len(p)
    return n


def apply_vec(fn, vecs) -> tuple:
    out = []
    for xs in zip(*vecs):
        if None in xs:
            out.append(None)
            continue
        try:
            out.append(fn(*xs))
        except (EvalError, ArithmeticError):
            out.append(None)
    return tuple(out)


def entry_kind(grammar: DslGrammar, entry: str, sig: HoleSignature) -> str:
    """Check a hole's entry nonterminal against its return kind.

    Returns:
        str: The nonterminal enumerated for the body (the component
            nonterminal for dual returns).

    Raises:
        SketchError: If the entry cannot produce the return kind.
    """
    nt = grammar.get(entry)
    if sig.ret == "dual":
        comp = grammar.components(entry)
        if comp is None:
            raise SketchError(f"dual hole needs a real or Dual(C, C) entry, {entry} is {nt.kind}")
        return comp
    if nt.kind != sig.ret:
        raise SketchError(f"entry {entry} is {nt.kind}, hole returns {sig.ret}")
    return entry


def enumerate_exprs(
    grammar: DslGrammar,
    sig: HoleSignature,
    max_size: int,
    envs: Sequence[Mapping[str, object]],
    entry: Optional[str] = None,
) -> Iterator[DslExpr]:
    """Yield bodies of the signature's return kind in canonical order.

    Sizes ascend; within a size the bank's canonical order applies. For a dual
    return every body is Dual(re, du) over the component nonterminal, ordered by
    total size, then re, then du.

    Args:
        grammar (DslGrammar): Grammar to enumerate.
        sig (HoleSignature): Hole signature.
        max_size (int): Largest body size, >= 1.
        envs (Sequence): Nonempty sample environments.
        entry (Optional[str]): Entry nonterminal; defaults to the first of the
            right kind.
    """
    if max_size < 1:
        raise ValueError("max_size must be >= 1")
    if entry is None:
        wanted = "real" if sig.ret == "dual" else sig.ret
        entry = next(nt.name for nt in grammar.nonterminals if nt.kind == wanted)
    nt = entry_kind(grammar, entry, sig)
    bank = ExprBank(grammar, sig, envs)
    if sig.ret != "dual":
        for size in range(1, max_size + 1):
            for e in bank.level(nt, size):
                yield e.expr
        return
    for size in range(3, max_size + 1):
        for rs in range(1, size - 1):
            for r in bank.level(nt, rs):
                for d in bank.level(nt, size - 1 - rs):
                    yield DslExpr("Dual", (r.expr, d.expr), kind="dual")
