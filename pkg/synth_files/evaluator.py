"""Syntax-directed evaluation over parse trees.

`schedule` orders the attribute instances of one tree by their dependencies,
`eval_concrete` runs a hole-free grammar, and `gen_trace` records the
straight-line program of one evaluation with every hole call left symbolic.
"""

# Import Libraries
import logging
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Dict, List, Mapping, Optional, Tuple, Union

from synth_files.dsl import DslExpr, HoleSignature, eval_body
from synth_files.errors import Circular, EvalError, MissingRule, ScheduleError, SketchError
from synth_files.grammar import (
    ActionExpr,
    AttrRead,
    Builtin,
    Const,
    GetVal,
    HoleCall,
    Label,
    LookUp,
    Output,
    SemanticRule,
    Sketch,
    used_holes,
)
from synth_files.parser import Leaf, Node, ParseTree
from synth_files.values import Context, Int, Value, apply_builtin, show_value

logger = logging.getLogger(__name__)

OUTPUT_ATTR = "#output"


@dataclass(frozen=True, order=True)
class AttrInstance:
    """An attribute of one tree node; the node is its child-index path from the root."""

    path: Tuple[int, ...]
    attr: str
    symbol: str = field(compare=False)

    def __str__(self) -> str:
        where = ".".join(map(str, self.path)) or "root"
        if self.attr == OUTPUT_ATTR:
            return f"output@{where}"
        return f"{self.symbol}@{where}.{self.attr}"


@dataclass(frozen=True)
class ScheduledRule:
    """A rule instantiated at one node."""

    instance: AttrInstance
    rule: SemanticRule
    node: Node
    path: Tuple[int, ...]


def _symbol_at(s: Sketch, node: ParseTree) -> str:
    return node.token.symbol if isinstance(node, Leaf) else s.production(node.prod).head


def _target(s: Sketch, node: Node, path, occurrence: int, attr: str) -> AttrInstance:
    if occurrence == 0:
        return AttrInstance(path, attr, s.production(node.prod).head)
    child = node.children[occurrence - 1]
    return AttrInstance(path + (occurrence - 1,), attr, _symbol_at(s, child))


def _reads(s: Sketch, node: Node, path, e: ActionExpr) -> List[AttrInstance]:
    out = []
    stack = [e]
    while stack:
        x = stack.pop()
        if isinstance(x, AttrRead):
            out.append(_target(s, node, path, x.ref.occurrence, x.ref.attr))
        elif isinstance(x, (Builtin, HoleCall)):
            stack.extend(x.args)
    return out


def schedule(s: Sketch, t: ParseTree) -> List[ScheduledRule]:
    """Order the rule instances of a tree so every read follows its definition.

    Ready instances are taken in (path, attribute) order, so independent
    instances are scheduled left to right.

    Args:
        s (Sketch): Grammar the tree was parsed with.
        t (ParseTree): Parse tree; its root carries the output rule.

    Returns:
        List[ScheduledRule]: Rules in evaluation order; the output rule is last
            among those it depends on.

    Raises:
        Circular: If the dependencies form a cycle.
        MissingRule: If an instance is read but no rule defines it.
    """
    rules: Dict[AttrInstance, ScheduledRule] = {}
    deps: Dict[AttrInstance, List[AttrInstance]] = {}
    stack: List[Tuple[ParseTree, Tuple[int, ...]]] = [(t, ())]
    while stack:
        node, path = stack.pop()
        if isinstance(node, Leaf):
            continue
        for rule in s.rules_of(node.prod):
            if isinstance(rule, Output):
                if path != ():
                    continue
                inst = AttrInstance(path, OUTPUT_ATTR, s.start)
            else:
                inst = _target(s, node, path, rule.target.occurrence, rule.target.attr)
            if inst in rules:
                raise ScheduleError(f"attribute instance {inst} is defined twice")
            rules[inst] = ScheduledRule(inst, rule, node, path)
            deps[inst] = _reads(s, node, path, rule.rhs)
        for k, child in enumerate(node.children):
            stack.append((child, path + (k,)))

    for inst, needs in deps.items():
        for d in needs:
            if d not in rules:
                raise MissingRule(d)

    sorter = TopologicalSorter(deps)
    try:
        sorter.prepare()
    except CycleError as e:
        raise Circular(e.args[1]) from None
    order = []
    while sorter.is_active():
        ready = sorted(sorter.get_ready())
        for inst in ready:
            order.append(rules[inst])
            sorter.done(inst)
    return order


# Concrete evaluation


def _child_token(node: Node, occurrence: int):
    child = node.children[occurrence - 1]
    if not isinstance(child, Leaf):
        raise EvalError(f"occurrence {occurrence} is not a terminal")
    return child.token


def _lexeme_value(node: Node, occurrence: int) -> Int:
    lexeme = _child_token(node, occurrence).lexeme
    try:
        return Int(int(lexeme))
    except ValueError:
        raise EvalError(f"lexeme {lexeme!r} is not an integer") from None


def _lookup(node: Node, occurrence: int, beta: Context) -> Value:
    name = _child_token(node, occurrence).lexeme
    if name not in beta:
        raise EvalError(f"unbound variable {name}")
    return beta[name]


def _eval_action(s: Sketch, step: ScheduledRule, e: ActionExpr, env, beta: Context):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Label):
        return e.text
    if isinstance(e, AttrRead):
        return env[_target(s, step.node, step.path, e.ref.occurrence, e.ref.attr)]
    if isinstance(e, GetVal):
        return _lexeme_value(step.node, e.occurrence)
    if isinstance(e, LookUp):
        return _lookup(step.node, e.occurrence, beta)
    if isinstance(e, HoleCall):
        raise EvalError(f"hole {e.hole} has no body")
    return apply_builtin(e.op, [_eval_action(s, step, a, env, beta) for a in e.args])


def _located(e: Exception, where: str) -> EvalError:
    if isinstance(e, EvalError):
        return e if e.where else EvalError(e.reason, where)
    return EvalError(str(e), where)


def eval_concrete(g: Sketch, t: ParseTree, beta: Context) -> Value:
    """Evaluate a hole-free grammar on a tree.

    Raises:
        SketchError: If g still calls holes.
        EvalError: On domain errors or unbound variables, naming the instance.
    """
    if used_holes(g):
        raise SketchError("eval_concrete needs a hole-free grammar")
    env: Dict[AttrInstance, Value] = {}
    for step in schedule(g, t):
        try:
            env[step.instance] = _eval_action(g, step, step.rule.rhs, env, beta)
        except (EvalError, OverflowError, TypeError, ValueError) as e:
            raise _located(e, str(step.instance)) from None
    out = AttrInstance((), OUTPUT_ATTR, g.start)
    if out not in env:
        raise EvalError("no output rule at the root")
    return env[out]


# Traces


@dataclass(frozen=True)
class TConst:
    value: Union[Value, str]


@dataclass(frozen=True)
class TVar:
    id: int


@dataclass(frozen=True)
class TBuiltin:
    op: str
    args: Tuple["TraceExpr", ...]


@dataclass(frozen=True)
class THole:
    hole: str
    args: Tuple["TraceExpr", ...]


TraceExpr = Union[TConst, TVar, TBuiltin, THole]


@dataclass(frozen=True)
class TraceStep:
    var: int
    rhs: TraceExpr


@dataclass(frozen=True)
class Trace:
    """A loop-free straight-line program.

    Attributes:
        steps (tuple): Single assignments in execution order.
        out (int): Variable holding the output.
        sigs (Mapping): Signatures of the holes called, for eval_trace.
    """

    steps: Tuple[TraceStep, ...]
    out: int
    sigs: Mapping[str, HoleSignature] = field(default_factory=dict, compare=False)

    def holes(self) -> frozenset:
        return frozenset(h for st in self.steps for h in _trace_holes(st.rhs))

    def step_of(self, var: int) -> Optional[TraceStep]:
        for st in self.steps:
            if st.var == var:
                return st
        return None

    def __str__(self) -> str:
        lines = [f"x{st.var} := {show_trace_expr(st.rhs)}" for st in self.steps]
        lines.append(f"out = x{self.out}")
        return "\n".join(lines)


def _trace_holes(e: TraceExpr):
    if isinstance(e, THole):
        yield e.hole
    if isinstance(e, (TBuiltin, THole)):
        for a in e.args:
            yield from _trace_holes(a)


def show_trace_expr(e: TraceExpr) -> str:
    if isinstance(e, TConst):
        return repr(e.value) if isinstance(e.value, str) else show_value(e.value)
    if isinstance(e, TVar):
        return f"x{e.id}"
    args = ", ".join(show_trace_expr(a) for a in e.args)
    return f"{e.hole if isinstance(e, THole) else e.op}({args})"


class _TraceBuilder:
    def __init__(self):
        self.steps: List[TraceStep] = []

    def emit(self, rhs: TraceExpr) -> TVar:
        var = len(self.steps) + 1
        self.steps.append(TraceStep(var, rhs))
        return TVar(var)


def _symbolic(x) -> bool:
    return isinstance(x, (TVar, TBuiltin, THole))


def _as_trace(x) -> TraceExpr:
    return x if _symbolic(x) else TConst(x)


def _trace_action(s: Sketch, step: ScheduledRule, e: ActionExpr, env, beta: Context, out: _TraceBuilder):
    """Evaluate e, folding concrete parts; returns a Value, a label or a TraceExpr."""
    if isinstance(e, (Const, Label, GetVal, LookUp)):
        return _eval_action(s, step, e, env, beta)
    if isinstance(e, AttrRead):
        return env[_target(s, step.node, step.path, e.ref.occurrence, e.ref.attr)]
    args = [_trace_action(s, step, a, env, beta, out) for a in e.args]
    if isinstance(e, HoleCall):
        return out.emit(THole(e.hole, tuple(_as_trace(a) for a in args)))
    if any(_symbolic(a) for a in args):
        return TBuiltin(e.op, tuple(_as_trace(a) for a in args))
    return apply_builtin(e.op, args)


def gen_trace(s: Sketch, t: ParseTree, beta: Context) -> Trace:
    """Record the evaluation of a tree as a trace.

    Concrete subcomputations are folded to constants, each hole call becomes a
    step of its own and a symbolic attribute copy reuses the variable it copies.
    The output always gets a variable (a constant step when no hole is involved).

    Raises:
        EvalError: On errors in the concrete parts, naming the instance.
    """
    out = _TraceBuilder()
    env: Dict[AttrInstance, object] = {}
    result = None
    for step in schedule(s, t):
        try:
            value = _trace_action(s, step, step.rule.rhs, env, beta, out)
        except (EvalError, OverflowError, TypeError, ValueError) as e:
            raise _located(e, str(step.instance)) from None
        if isinstance(value, (TBuiltin, THole)):
            value = out.emit(value)
        env[step.instance] = value
        if step.instance.attr == OUTPUT_ATTR:
            result = value
    if result is None:
        raise EvalError("no output rule at the root")
    if not isinstance(result, TVar):
        result = out.emit(TConst(result))
    sigs = {h: s.hole(h).signature for h in used_holes(s)}
    return Trace(tuple(out.steps), result.id, sigs)


def eval_trace_expr(e: TraceExpr, env: Mapping[int, Value], bodies: Mapping[str, DslExpr], sigs):
    if isinstance(e, TConst):
        return e.value
    if isinstance(e, TVar):
        return env[e.id]
    args = [eval_trace_expr(a, env, bodies, sigs) for a in e.args]
    if isinstance(e, THole):
        if e.hole not in bodies:
            raise SketchError(f"missing binding {e.hole}")
        return eval_body(bodies[e.hole], sigs[e.hole], args)
    return apply_builtin(e.op, args)


def eval_trace(tr: Trace, bodies: Mapping[str, DslExpr]) -> Value:
    """Run a trace with hole bodies bound.

    Raises:
        SketchError: If a called hole has no body.
        EvalError: On evaluation errors, naming the step.
    """
    env: Dict[int, Value] = {}
    for i, st in enumerate(tr.steps, start=1):
        try:
            env[st.var] = eval_trace_expr(st.rhs, env, bodies, tr.sigs)
        except (EvalError, OverflowError, TypeError, ValueError) as e:
            if isinstance(e, SketchError):
                raise
            raise _located(e, f"step {i}") from None
    return env[tr.out]


def check_trace(tr: Trace) -> None:
    """Assert single assignment, use after definition and a defined output.

    Raises:
        ValueError: Naming the violated property.
    """
    defined = set()

    def uses(e):
        if isinstance(e, TVar):
            yield e.id
        elif isinstance(e, (TBuiltin, THole)):
            for a in e.args:
                yield from uses(a)

    for st in tr.steps:
        for v in uses(st.rhs):
            if v not in defined:
                raise ValueError(f"x{v} used before assignment")
        if st.var in defined:
            raise ValueError(f"x{st.var} assigned twice")
        defined.add(st.var)
    if tr.out not in defined:
        raise ValueError("out is never assigned")
