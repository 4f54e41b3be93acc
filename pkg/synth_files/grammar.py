"""Attribute-grammar sketches: symbols, productions, semantic rules and holes.

A Sketch is immutable once loaded. `validate` enforces well-formedness (it runs
inside `load_sketch` and on every completion), `sketchy_prods` finds productions
whose rules call holes, and `complete` substitutes DSL bodies for holes by
inlining them as ordinary builtin expressions.
"""

# Import Libraries
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, Mapping, Optional, Set, Tuple, Union

from synth_files.dsl import DslExpr, DslGrammar, HoleSignature, check_body, entry_kind
from synth_files.errors import SketchError
from synth_files.values import BUILTIN_ARITY, KINDS, Real, Value, from_scalar


@dataclass(frozen=True)
class Symbol:
    """A terminal or nonterminal.

    Attributes:
        name (str): Unique symbol name.
        terminal (bool): True for terminals.
        pattern (Optional[str]): Literal text or regular expression of a terminal.
        regex (bool): True when `pattern` is a regular expression.
        value_kind (str): "none", "int" (getVal) or "ident" (lookUp).
    """

    name: str
    terminal: bool
    pattern: Optional[str] = None
    regex: bool = False
    value_kind: str = "none"


@dataclass(frozen=True)
class Production:
    id: int
    head: str
    body: Tuple[str, ...]
    line: Optional[int] = field(default=None, compare=False)

    def __str__(self) -> str:
        return f"{self.head} -> {' '.join(self.body)}".rstrip()


@dataclass(frozen=True)
class AttrRef:
    """Attribute of the head (occurrence 0) or of the k-th body symbol."""

    occurrence: int
    attr: str


# Action expressions


@dataclass(frozen=True)
class Const:
    value: Value


@dataclass(frozen=True)
class Label:
    text: str


@dataclass(frozen=True)
class AttrRead:
    ref: AttrRef


@dataclass(frozen=True)
class GetVal:
    occurrence: int


@dataclass(frozen=True)
class LookUp:
    occurrence: int


@dataclass(frozen=True)
class Builtin:
    op: str
    args: Tuple["ActionExpr", ...]


@dataclass(frozen=True)
class HoleCall:
    hole: str
    args: Tuple["ActionExpr", ...]


ActionExpr = Union[Const, Label, AttrRead, GetVal, LookUp, Builtin, HoleCall]


@dataclass(frozen=True)
class Assign:
    target: AttrRef
    rhs: ActionExpr


@dataclass(frozen=True)
class Output:
    rhs: ActionExpr


SemanticRule = Union[Assign, Output]


@dataclass(frozen=True)
class HoleDecl:
    name: str
    params: Tuple[str, ...]
    ret: str
    entry: str
    line: Optional[int] = field(default=None, compare=False)

    @property
    def signature(self) -> HoleSignature:
        return HoleSignature(self.params, self.ret)


@dataclass(frozen=True)
class Sketch:
    """An attribute grammar with holes, plus its DSL section.

    Attributes:
        start (str): Start nonterminal.
        symbols (tuple): Terminals in declaration order, then nonterminals.
        productions (tuple): Productions, id = 1-based position.
        holes (tuple): Hole declarations.
        rules (tuple): Semantic rules per production, aligned with `productions`.
        dsl (DslGrammar): Candidate-body grammar.
        var_pool (tuple): Context variable names offered to the example generator.
    """

    start: str
    symbols: Tuple[Symbol, ...]
    productions: Tuple[Production, ...]
    holes: Tuple[HoleDecl, ...] = ()
    rules: Tuple[Tuple[SemanticRule, ...], ...] = ()
    dsl: DslGrammar = field(default_factory=DslGrammar)
    var_pool: Tuple[str, ...] = ()

    def symbol(self, name: str) -> Symbol:
        for sym in self.symbols:
            if sym.name == name:
                return sym
        raise KeyError(name)

    @property
    def terminals(self) -> Tuple[Symbol, ...]:
        return tuple(s for s in self.symbols if s.terminal)

    def production(self, pid: int) -> Production:
        return self.productions[pid - 1]

    def rules_of(self, pid: int) -> Tuple[SemanticRule, ...]:
        return self.rules[pid - 1]

    def hole(self, name: str) -> HoleDecl:
        for h in self.holes:
            if h.name == name:
                return h
        raise KeyError(name)

    @property
    def signatures(self) -> Dict[str, HoleSignature]:
        return {h.name: h.signature for h in self.holes}

    def by_head(self, head: str) -> Tuple[Production, ...]:
        return tuple(p for p in self.productions if p.head == head)

    def occurrence_symbol(self, pid: int, occurrence: int) -> str:
        p = self.production(pid)
        return p.head if occurrence == 0 else p.body[occurrence - 1]


def walk(e: ActionExpr) -> Iterator[ActionExpr]:
    """Yield an expression and all its subexpressions, preorder."""
    yield e
    if isinstance(e, (Builtin, HoleCall)):
        for a in e.args:
            yield from walk(a)


def rule_rhs(rule: SemanticRule) -> ActionExpr:
    return rule.rhs


def holes_in(rule: SemanticRule) -> Set[str]:
    return {e.hole for e in walk(rule.rhs) if isinstance(e, HoleCall)}


def prod_holes(s: Sketch, pid: int) -> Set[str]:
    """Holes called by the rules of production `pid`."""
    out: Set[str] = set()
    for rule in s.rules_of(pid):
        out |= holes_in(rule)
    return out


def sketchy_prods(s: Sketch) -> Set[int]:
    """Ids of productions whose rules contain at least one hole call."""
    return {p.id for p in s.productions if prod_holes(s, p.id)}


def used_holes(s: Sketch) -> Set[str]:
    out: Set[str] = set()
    for p in s.productions:
        out |= prod_holes(s, p.id)
    return out


def attributes(s: Sketch) -> Dict[str, Set[str]]:
    """Attributes declared per nonterminal (any attribute some rule assigns)."""
    attrs: Dict[str, Set[str]] = {}
    for p in s.productions:
        for rule in s.rules_of(p.id):
            if isinstance(rule, Assign):
                sym = s.occurrence_symbol(p.id, rule.target.occurrence)
                attrs.setdefault(sym, set()).add(rule.target.attr)
    return attrs


def validate(s: Sketch) -> Sketch:
    """Check a sketch for well-formedness.

    Returns:
        Sketch: The same sketch.

    Raises:
        SketchError: With the line of the offending production or hole.
    """
    names = [sym.name for sym in s.symbols]
    dupes = {n for n in names if names.count(n) > 1}
    if dupes:
        raise SketchError(f"duplicate symbol {sorted(dupes)[0]}")
    by_name = {sym.name: sym for sym in s.symbols}
    if s.start not in by_name or by_name[s.start].terminal:
        raise SketchError(f"start symbol {s.start} is not a declared nonterminal")
    if len(s.rules) != len(s.productions):
        raise SketchError("rule map does not cover every production")

    for i, p in enumerate(s.productions, start=1):
        if p.id != i:
            raise SketchError(f"duplicate or out-of-order production id {p.id}", p.line)
        if p.head not in by_name or by_name[p.head].terminal:
            raise SketchError(f"production head {p.head} is not a nonterminal", p.line)
        for sym in p.body:
            if sym not in by_name:
                raise SketchError(f"undeclared symbol {sym}", p.line)
    if not s.by_head(s.start):
        raise SketchError(f"no production for start symbol {s.start}")

    hole_names = [h.name for h in s.holes]
    for h in s.holes:
        if hole_names.count(h.name) > 1:
            raise SketchError(f"duplicate hole {h.name}", h.line)
        for kind in h.params + (h.ret,):
            if kind not in KINDS:
                raise SketchError(f"hole {h.name} uses unknown kind {kind}", h.line)
        if not s.dsl.has(h.entry):
            raise SketchError(f"hole {h.name} names unknown DSL nonterminal {h.entry}", h.line)
        try:
            entry_kind(s.dsl, h.entry, h.signature)
        except SketchError as e:
            raise SketchError(f"hole {h.name}: {e}", h.line) from None
    decls = {h.name: h for h in s.holes}

    attrs = attributes(s)
    for p in s.productions:
        targets = set()
        outputs = 0
        for rule in s.rules_of(p.id):
            if isinstance(rule, Output):
                if p.head != s.start:
                    raise SketchError(f"output rule on production {p.id} not headed by {s.start}", p.line)
                outputs += 1
            else:
                _check_ref(s, p, rule.target, attrs, by_name, declared_only=False)
                key = (rule.target.occurrence, rule.target.attr)
                if key in targets:
                    raise SketchError(f"two rules assign {_show_ref(p, rule.target)}", p.line)
                targets.add(key)
            for e in walk(rule.rhs):
                _check_expr(s, p, e, attrs, by_name, decls)
        if p.head == s.start and outputs != 1:
            raise SketchError(f"output rule missing on start production {p.id}" if outputs == 0
                              else f"production {p.id} has {outputs} output rules", p.line)
    return s


def _show_ref(p: Production, ref: AttrRef) -> str:
    sym = p.head if ref.occurrence == 0 else p.body[ref.occurrence - 1]
    return f"{sym}.{ref.attr} (occurrence {ref.occurrence})"


def _check_ref(s, p, ref: AttrRef, attrs, by_name, declared_only=True) -> None:
    if not 0 <= ref.occurrence <= len(p.body):
        raise SketchError(f"occurrence {ref.occurrence} out of range in production {p.id}", p.line)
    sym = s.occurrence_symbol(p.id, ref.occurrence)
    if by_name[sym].terminal:
        raise SketchError(f"terminal {sym} has no attributes", p.line)
    if declared_only and ref.attr not in attrs.get(sym, ()):
        raise SketchError(f"attribute {ref.attr} is never defined for {sym}", p.line)


def _check_expr(s, p, e, attrs, by_name, decls) -> None:
    if isinstance(e, AttrRead):
        _check_ref(s, p, e.ref, attrs, by_name)
    elif isinstance(e, (GetVal, LookUp)):
        if not 1 <= e.occurrence <= len(p.body):
            raise SketchError(f"occurrence {e.occurrence} out of range in production {p.id}", p.line)
        sym = by_name[p.body[e.occurrence - 1]]
        fn = "getVal" if isinstance(e, GetVal) else "lookUp"
        need = "int" if isinstance(e, GetVal) else "ident"
        if not sym.terminal or sym.value_kind != need:
            raise SketchError(f"{fn} needs a terminal carrying an {need} lexeme, got {sym.name}", p.line)
    elif isinstance(e, Builtin):
        arity = BUILTIN_ARITY.get(e.op)
        if arity is None:
            raise SketchError(f"unknown builtin {e.op}", p.line)
        if len(e.args) != arity:
            raise SketchError(f"builtin {e.op} expects {arity} arguments, got {len(e.args)}", p.line)
        for k, a in enumerate(e.args):
            if isinstance(a, Label) and not (e.op == "tag" and k == 0):
                raise SketchError("text labels are only allowed as the first argument of tag", p.line)
        if e.op == "tag" and not isinstance(e.args[0], Label):
            raise SketchError("tag needs a text label as first argument", p.line)
    elif isinstance(e, HoleCall):
        decl = decls.get(e.hole)
        if decl is None:
            raise SketchError(f"undeclared hole {e.hole}", p.line)
        if len(e.args) != len(decl.params):
            raise SketchError(
                f"hole arity mismatch: {e.hole} declared with {len(decl.params)} parameters, called with {len(e.args)}",
                p.line,
            )
        if any(isinstance(a, Label) for a in e.args):
            raise SketchError("text labels cannot be passed to holes", p.line)


# Completion


def inline_body(body: DslExpr, sig: HoleSignature, args: Tuple[ActionExpr, ...]) -> ActionExpr:
    """Translate a hole body into an action expression over the call's arguments."""

    def go(e: DslExpr) -> ActionExpr:
        if e.op == "const":
            v = from_scalar(e.value)
            return Const(Real(float(e.value)) if e.kind == "real" else v)
        if e.op == "param":
            k = int(e.name.split("_")[1])
            arg = args[k - 1]
            kind = sig.params[k - 1]
            if kind == "dual":
                return Builtin("re" if e.name.startswith("a_") else "du", (arg,))
            if kind == "real":
                return Builtin("real", (arg,))
            return arg
        return Builtin(e.op, tuple(go(a) for a in e.args))

    out = go(body)
    if sig.ret == "real" and body.kind == "int":
        out = Builtin("real", (out,))
    return out


def _substitute(e: ActionExpr, bodies: Mapping[str, DslExpr], sigs: Mapping[str, HoleSignature]) -> ActionExpr:
    if isinstance(e, Builtin):
        return Builtin(e.op, tuple(_substitute(a, bodies, sigs) for a in e.args))
    if isinstance(e, HoleCall):
        args = tuple(_substitute(a, bodies, sigs) for a in e.args)
        return inline_body(bodies[e.hole], sigs[e.hole], args)
    return e


def complete(s: Sketch, bodies: Mapping[str, DslExpr]) -> Sketch:
    """Replace every hole call by the inlined bound body.

    Args:
        s (Sketch): Sketch to complete.
        bodies (Mapping[str, DslExpr]): Body per hole; extra entries are ignored.

    Returns:
        Sketch: A hole-free sketch (s itself when s has no holes and bodies is empty).

    Raises:
        SketchError: On a missing binding or a body that does not fit its declaration.
    """
    needed = used_holes(s)
    if not needed and not s.holes and not bodies:
        return s
    missing = sorted(needed - set(bodies))
    if missing:
        raise SketchError(f"missing binding {missing[0]}")
    sigs = s.signatures
    for name in sorted(needed):
        try:
            check_body(bodies[name], sigs[name])
        except SketchError as e:
            raise SketchError(f"body of {name}: {e}") from None
    rules = tuple(
        tuple(
            Assign(r.target, _substitute(r.rhs, bodies, sigs)) if isinstance(r, Assign)
            else Output(_substitute(r.rhs, bodies, sigs))
            for r in prod_rules
        )
        for prod_rules in s.rules
    )
    return validate(replace(s, holes=(), rules=rules))
