"""Reading and writing sketch files.

Example:

    %start S
    %token PLUS "+"
    %token num  /[0-9]+/ int
    %token var  /[a-z]+/ ident
    %hole h1(dual, dual) -> dual : C
    %dsl  C ::= param | lit | add(C,C) | mul(C,C)
    S -> E                { output E.val ; }
    E -> E PLUS K         { E0.val = ?h1(E1.val, K1.val) ; }
    K -> num              { K0.val = Dual(getVal(num1), 0) ; }

Occurrences carry a per-symbol index (E0 is the head, E1 the first E of the
body); a bare name is accepted when the symbol occurs once in the production.
"""

# Import Libraries
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import pyparsing as pp

from synth_files.dsl import Alternative, DslGrammar, build_grammar
from synth_files.errors import SketchError
from synth_files.grammar import (
    ActionExpr,
    Assign,
    AttrRead,
    AttrRef,
    Builtin,
    Const,
    GetVal,
    HoleCall,
    HoleDecl,
    Label,
    LookUp,
    Output,
    Production,
    Sketch,
    Symbol,
    complete,
    validate,
)
from synth_files.values import Bool, Dual, Int, Real, Tag

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class _RawCall:
    op: str
    args: tuple
    hole: bool = False


@dataclass(frozen=True)
class _RawAttr:
    occurrence: str
    attr: str


@dataclass(frozen=True)
class _RawName:
    name: str


def _number(text: str):
    return float(text) if any(c in text for c in ".eE") else int(text)


def _grammar() -> pp.ParserElement:
    ident = pp.Word(pp.alphas + "_", pp.alphanums + "_")
    arrow = pp.Literal("->")
    number = pp.Regex(r"-?\d+(\.\d*)?([eE][-+]?\d+)?")
    text = pp.QuotedString('"', esc_char="\\")
    true_false = pp.Keyword("true") | pp.Keyword("false")

    # action expressions
    expr = pp.Forward()
    args = pp.Suppress("(") + pp.Group(pp.Opt(pp.DelimitedList(expr))) + pp.Suppress(")")
    attr = pp.Regex(r"[A-Za-z_][A-Za-z0-9_]*\.[A-Za-z_][A-Za-z0-9_]*")
    hole_call = pp.Suppress("?") + ident + args
    call = ident + args
    hole_call.set_parse_action(lambda t: _RawCall(t[0], tuple(t[1]), True))
    call.set_parse_action(lambda t: _RawCall(t[0], tuple(t[1])))
    attr.set_parse_action(lambda t: _RawAttr(*t[0].split(".")))
    number_const = number.copy().set_parse_action(lambda t: Const(_const_value(_number(t[0]))))
    text_const = text.copy().set_parse_action(lambda t: Label(t[0]))
    bool_const = true_false.copy().set_parse_action(lambda t: Const(Bool(t[0] == "true")))
    name = ident.copy().set_parse_action(lambda t: _RawName(t[0]))
    expr <<= hole_call | bool_const | call | attr | number_const | text_const | name

    assign = attr + pp.Suppress("=") + expr
    assign.set_parse_action(lambda t: ("assign", t[0], t[1]))
    output = pp.Suppress(pp.Keyword("output")) + expr
    output.set_parse_action(lambda t: ("output", t[0]))
    rule = output | assign
    block = pp.Suppress("{") + pp.Group(pp.Opt(pp.DelimitedList(rule, ";") + pp.Opt(pp.Suppress(";")))) + pp.Suppress("}")

    # declarations
    not_head = ~pp.FollowedBy(arrow)
    start = pp.Suppress("%start") + ident
    start.set_parse_action(lambda s, loc, t: ("start", pp.lineno(loc, s), t[0]))
    regex = pp.Regex(r"/((?:\\.|[^/\n\\])+)/")
    regex.set_parse_action(lambda t: ("regex", t[0][1:-1].replace("\\/", "/")))
    literal = text.copy().set_parse_action(lambda t: ("literal", t[0]))
    value_kind = pp.Opt((pp.Keyword("int") | pp.Keyword("ident")) + not_head, default="none")
    token = pp.Suppress("%token") + ident + (regex | literal) + value_kind
    token.set_parse_action(lambda s, loc, t: ("token", pp.lineno(loc, s), t[0], t[1], t[2]))
    var_list = pp.Suppress("%vars") + pp.Group(pp.OneOrMore(ident + not_head))
    var_list.set_parse_action(lambda s, loc, t: ("vars", pp.lineno(loc, s), tuple(t[0])))
    kinds = pp.Group(pp.Opt(pp.DelimitedList(ident)))
    hole = pp.Suppress("%hole") + ident + pp.Suppress("(") + kinds + pp.Suppress(")") + pp.Suppress(arrow) + ident + pp.Suppress(":") + ident
    hole.set_parse_action(lambda s, loc, t: ("hole", pp.lineno(loc, s), HoleDecl(t[0], tuple(t[1]), t[2], t[3], pp.lineno(loc, s))))
    dsl_alt = (
        pp.Keyword("param").set_parse_action(lambda: Alternative("param"))
        | pp.Keyword("lit").set_parse_action(lambda: Alternative("lit"))
        | true_false.copy().set_parse_action(lambda t: Alternative("const", t[0] == "true"))
        | number.copy().set_parse_action(lambda t: Alternative("const", _number(t[0])))
        | (ident + pp.Suppress("(") + pp.Group(pp.DelimitedList(ident)) + pp.Suppress(")")).set_parse_action(
            lambda t: Alternative("app", op=t[0], children=tuple(t[1]))
        )
        | (ident + not_head).set_parse_action(lambda t: _RawName(t[0]))
    )
    dsl = pp.Suppress("%dsl") + ident + pp.Opt(pp.Suppress(":") + ident, default="") + pp.Suppress("::=") + pp.Group(pp.DelimitedList(dsl_alt, "|"))
    dsl.set_parse_action(lambda s, loc, t: ("dsl", pp.lineno(loc, s), t[0], t[1] or None, tuple(t[2])))
    production = ident + pp.Suppress(arrow) + pp.Group(pp.ZeroOrMore(ident + not_head)) + pp.Opt(block, default=[])
    production.set_parse_action(
        lambda s, loc, t: ("production", pp.lineno(loc, s), t[0], tuple(t[1]), tuple(t[2]) if len(t) > 2 else ())
    )

    statement = start | token | var_list | hole | dsl | production
    document = pp.ZeroOrMore(pp.Group(statement)) + pp.StringEnd()
    document.ignore(pp.python_style_comment)
    return document


def _const_value(x):
    return Int(x) if type(x) is int else Real(x)


_DOCUMENT = _grammar()


def load_sketch(text: str) -> Sketch:
    """Parse and validate a sketch file.

    Args:
        text (str): Sketch file contents.

    Returns:
        Sketch: The validated sketch.

    Raises:
        SketchError: On syntax or validation errors, with the line number.
    """
    try:
        statements = [g[0] for g in _DOCUMENT.parse_string(text, parse_all=True)]
    except pp.ParseException as e:
        raise SketchError(f"syntax error near {e.line.strip()!r}", e.lineno) from None

    start: Optional[str] = None
    terminals: List[Symbol] = []
    heads: List[str] = []
    productions: List[Production] = []
    raw_rules: List[tuple] = []
    holes: List[HoleDecl] = []
    dsl_decls: List[tuple] = []
    dsl_line: Optional[int] = None
    var_pool: Tuple[str, ...] = ()

    for stmt in statements:
        tag, line = stmt[0], stmt[1]
        if tag == "start":
            if start is not None:
                raise SketchError("duplicate %start", line)
            start = stmt[2]
        elif tag == "token":
            _, _, name, (form, pattern), value_kind = stmt
            terminals.append(Symbol(name, True, pattern, form == "regex", value_kind))
        elif tag == "vars":
            var_pool = var_pool + stmt[2]
        elif tag == "hole":
            holes.append(stmt[2])
        elif tag == "dsl":
            _, _, name, kind, alts = stmt
            for alt in alts:
                if isinstance(alt, _RawName):
                    raise SketchError(f"DSL alternative {alt.name} of {name} must apply a builtin", line)
            dsl_decls.append((name, kind, alts))
            dsl_line = dsl_line or line
        else:
            _, _, head, body, rules = stmt
            if head not in heads:
                heads.append(head)
            productions.append(Production(len(productions) + 1, head, body, line))
            raw_rules.append(rules)

    if not productions:
        raise SketchError("sketch declares no productions")
    start = start or productions[0].head
    nonterminals = [Symbol(h, False) for h in heads]
    dsl = build_grammar(dsl_decls, dsl_line) if dsl_decls else DslGrammar()
    rules = tuple(_resolve_rules(p, raw) for p, raw in zip(productions, raw_rules))
    sketch = Sketch(
        start=start,
        symbols=tuple(terminals + nonterminals),
        productions=tuple(productions),
        holes=tuple(holes),
        rules=rules,
        dsl=dsl,
        var_pool=var_pool,
    )
    validate(sketch)
    logger.debug("loaded sketch: %d productions, %d holes", len(productions), len(holes))
    return sketch


def _occurrence(name: str, p: Production) -> int:
    """Resolve `E1`, `E0` or a bare `E` to an occurrence index of production p."""
    present = (p.head,) + p.body
    if name in present:
        if present.count(name) != 1:
            raise SketchError(f"occurrence {name} is ambiguous in production {p.id}, add an index", p.line)
        return 0 if p.head == name else p.body.index(name) + 1
    for cut in range(len(name) - 1, 0, -1):
        sym, digits = name[:cut], name[cut:]
        if not digits.isdigit() or sym not in present:
            continue
        k = int(digits)
        if k == 0:
            if sym != p.head:
                raise SketchError(f"{name}: occurrence 0 is the head {p.head}", p.line)
            return 0
        positions = [i for i, b in enumerate(p.body, start=1) if b == sym]
        if k > len(positions):
            raise SketchError(f"{name}: production {p.id} has {len(positions)} occurrences of {sym}", p.line)
        return positions[k - 1]
    raise SketchError(f"unknown occurrence {name} in production {p.id}", p.line)


def _resolve(raw, p: Production) -> ActionExpr:
    if isinstance(raw, (Const, Label)):
        return raw
    if isinstance(raw, _RawAttr):
        return AttrRead(AttrRef(_occurrence(raw.occurrence, p), raw.attr))
    if isinstance(raw, _RawName):
        raise SketchError(f"bare name {raw.name} is only allowed inside getVal or lookUp", p.line)
    if raw.hole:
        return HoleCall(raw.op, tuple(_resolve(a, p) for a in raw.args))
    if raw.op in ("getVal", "lookUp"):
        if len(raw.args) != 1 or not isinstance(raw.args[0], _RawName):
            raise SketchError(f"{raw.op} takes one terminal occurrence", p.line)
        k = _occurrence(raw.args[0].name, p)
        if k == 0:
            raise SketchError(f"{raw.op} needs a body occurrence", p.line)
        return GetVal(k) if raw.op == "getVal" else LookUp(k)
    return Builtin(raw.op, tuple(_resolve(a, p) for a in raw.args))


def _resolve_rules(p: Production, raw_rules) -> tuple:
    out = []
    for raw in raw_rules:
        if raw[0] == "output":
            out.append(Output(_resolve(raw[1], p)))
        else:
            target = raw[1]
            out.append(Assign(AttrRef(_occurrence(target.occurrence, p), target.attr), _resolve(raw[2], p)))
    return tuple(out)


# Writing


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _occ_name(p: Production, occurrence: int) -> str:
    if occurrence == 0:
        return f"{p.head}0"
    sym = p.body[occurrence - 1]
    return f"{sym}{p.body[:occurrence].count(sym)}"


def _show_const(v) -> str:
    if isinstance(v, Int):
        return str(v.i)
    if isinstance(v, Real):
        return repr(v.r)
    if isinstance(v, Bool):
        return "true" if v.b else "false"
    if isinstance(v, Dual):
        return f"Dual({v.re!r}, {v.du!r})"
    if isinstance(v, Tag):
        return f"tag({_quote(v.label)}, {v.amount!r})"
    raise TypeError(f"not a Value: {v!r}")


def show_action(e: ActionExpr, p: Production) -> str:
    """Render an action expression in sketch syntax."""
    if isinstance(e, Const):
        return _show_const(e.value)
    if isinstance(e, Label):
        return _quote(e.text)
    if isinstance(e, AttrRead):
        return f"{_occ_name(p, e.ref.occurrence)}.{e.ref.attr}"
    if isinstance(e, GetVal):
        return f"getVal({_occ_name(p, e.occurrence)})"
    if isinstance(e, LookUp):
        return f"lookUp({_occ_name(p, e.occurrence)})"
    args = ", ".join(show_action(a, p) for a in e.args)
    if isinstance(e, HoleCall):
        return f"?{e.hole}({args})"
    return f"{e.op}({args})"


def _show_rule(rule, p: Production) -> str:
    if isinstance(rule, Output):
        return f"output {show_action(rule.rhs, p)}"
    return f"{_occ_name(p, rule.target.occurrence)}.{rule.target.attr} = {show_action(rule.rhs, p)}"


def dump_sketch(s: Sketch) -> str:
    """Write a sketch in the format read by `load_sketch`.

    `load_sketch(dump_sketch(s))` rebuilds a sketch with the same productions,
    rules, holes and DSL.
    """
    lines = [f"%start {s.start}"]
    width = max(len(t.name) for t in s.terminals) if s.terminals else 0
    for t in s.terminals:
        pattern = "/" + t.pattern.replace("/", "\\/") + "/" if t.regex else _quote(t.pattern)
        kind = f" {t.value_kind}" if t.value_kind != "none" else ""
        lines.append(f"%token {t.name.ljust(width)} {pattern}{kind}")
    if s.var_pool:
        lines.append("%vars " + " ".join(s.var_pool))
    for h in s.holes:
        lines.append(f"%hole {h.name}({', '.join(h.params)}) -> {h.ret} : {h.entry}")
    for nt in s.dsl.nonterminals:
        alts = " | ".join(a.show() for a in nt.alternatives)
        lines.append(f"%dsl {nt.name} : {nt.kind} ::= {alts}")
    heads = [str(p) for p in s.productions]
    width = max(len(h) for h in heads)
    for p, head in zip(s.productions, heads):
        rules = s.rules_of(p.id)
        block = "{ " + " ; ".join(_show_rule(r, p) for r in rules) + " ; }" if rules else "{ }"
        lines.append(f"{head.ljust(width)}  {block}")
    return "\n".join(lines) + "\n"


def write_completion(s: Sketch, bodies: Dict[str, object]) -> str:
    """Dump the completion of `s` by `bodies` (holes inlined)."""
    return dump_sketch(complete(s, bodies))
