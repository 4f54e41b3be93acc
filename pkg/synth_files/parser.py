"""Tokenizing and Earley parsing of example strings.

The chart recognizer accepts any context-free grammar, including ε-rules and
left recursion. Trees are then read off the chart; an input whose parse forest
holds two or more trees is rejected as ambiguous instead of picking one.
"""

# Import Libraries
import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Sequence, Set, Tuple, Union

from synth_files.errors import Ambiguous, LexError, NoParse
from synth_files.grammar import Sketch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Token:
    symbol: str
    lexeme: str
    position: int


@dataclass(frozen=True)
class Leaf:
    token: Token


@dataclass(frozen=True)
class Node:
    """Internal node: production id and one child per body symbol."""

    prod: int
    children: Tuple["ParseTree", ...]


ParseTree = Union[Leaf, Node]


@lru_cache(maxsize=256)
def _compile(pattern: str) -> "re.Pattern":
    return re.compile(pattern)


def tokenize(s: Sketch, text: str) -> List[Token]:
    """Split an input into tokens by maximal munch.

    Whitespace between tokens is skipped. Among the longest matches the terminal
    declared first wins.

    Args:
        s (Sketch): Sketch whose terminals are used.
        text (str): Input string.

    Returns:
        List[Token]: Tokens in input order.

    Raises:
        LexError: If no terminal matches at some position.
    """
    tokens = []
    pos = 0
    n = len(text)
    terminals = s.terminals
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        best, best_len = None, 0
        for t in terminals:
            if t.regex:
                m = _compile(t.pattern).match(text, pos)
                length = m.end() - pos if m else 0
            else:
                length = len(t.pattern) if text.startswith(t.pattern, pos) else 0
            if length > best_len:
                best, best_len = t, length
        if best is None:
            raise LexError(pos, text[pos])
        tokens.append(Token(best.name, text[pos : pos + best_len], pos))
        pos += best_len
    return tokens


def nullable_symbols(s: Sketch) -> Set[str]:
    """Nonterminals that derive the empty string."""
    nullable: Set[str] = set()
    changed = True
    while changed:
        changed = False
        for p in s.productions:
            if p.head not in nullable and all(b in nullable for b in p.body):
                nullable.add(p.head)
                changed = True
    return nullable


class _Chart:
    """Earley item sets; an item is (production index, dot, origin)."""

    def __init__(self, s: Sketch, tokens: Sequence[Token]):
        self.s = s
        self.tokens = tokens
        self.terminal = {sym.name: sym.terminal for sym in s.symbols}
        self.nullable = nullable_symbols(s)
        self.sets: List[List[Tuple[int, int, int]]] = [[] for _ in range(len(tokens) + 1)]
        self.seen: List[Set[Tuple[int, int, int]]] = [set() for _ in range(len(tokens) + 1)]

    def add(self, j: int, item: Tuple[int, int, int]) -> None:
        if item not in self.seen[j]:
            self.seen[j].add(item)
            self.sets[j].append(item)

    def run(self) -> None:
        prods = self.s.productions
        for i, p in enumerate(prods):
            if p.head == self.s.start:
                self.add(0, (i, 0, 0))
        for j in range(len(self.tokens) + 1):
            items = self.sets[j]
            k = 0
            while k < len(items):
                pi, dot, origin = items[k]
                k += 1
                body = prods[pi].body
                if dot == len(body):
                    head = prods[pi].head
                    for qi, qdot, qorigin in list(self.sets[origin]):
                        qbody = prods[qi].body
                        if qdot < len(qbody) and qbody[qdot] == head:
                            self.add(j, (qi, qdot + 1, qorigin))
                    continue
                nxt = body[dot]
                if self.terminal[nxt]:
                    if j < len(self.tokens) and self.tokens[j].symbol == nxt:
                        self.add(j + 1, (pi, dot + 1, origin))
                    continue
                for qi, q in enumerate(prods):
                    if q.head == nxt:
                        self.add(j, (qi, 0, j))
                if nxt in self.nullable:
                    self.add(j, (pi, dot + 1, origin))

    def completed(self) -> Dict[Tuple[str, int], Set[int]]:
        """(head, origin) -> ends of spans the head derives."""
        done: Dict[Tuple[str, int], Set[int]] = {}
        prods = self.s.productions
        for j, items in enumerate(self.sets):
            for pi, dot, origin in items:
                if dot == len(prods[pi].body):
                    done.setdefault((prods[pi].head, origin), set()).add(j)
        return done


class _Forest:
    """Counts derivations over chart spans, capped at 2, and extracts trees."""

    def __init__(self, s: Sketch, tokens: Sequence[Token], done):
        self.s = s
        self.tokens = tokens
        self.done = done
        self.terminal = {sym.name: sym.terminal for sym in s.symbols}
        self.sym_memo: Dict[Tuple[str, int, int], int] = {}
        self.seq_memo: Dict[Tuple[int, int, int, int], int] = {}
        self.active: Set[Tuple[str, int, int]] = set()

    def count(self, sym: str, i: int, j: int) -> int:
        if self.terminal[sym]:
            return 1 if j == i + 1 and self.tokens[i].symbol == sym else 0
        if j not in self.done.get((sym, i), ()):
            return 0
        key = (sym, i, j)
        if key in self.sym_memo:
            return self.sym_memo[key]
        if key in self.active:
            # a derivation cycle over a derivable span means unboundedly many trees
            return 2
        self.active.add(key)
        total = 0
        for p in self.s.by_head(sym):
            total += self.seq(p.id, 0, i, j)
            if total >= 2:
                break
        self.active.discard(key)
        self.sym_memo[key] = min(total, 2)
        return self.sym_memo[key]

    def seq(self, pid: int, k: int, i: int, j: int) -> int:
        """Ways body[k:] of production pid derives tokens[i:j], capped at 2."""
        body = self.s.production(pid).body
        if k == len(body):
            return 1 if i == j else 0
        key = (pid, k, i, j)
        if key in self.seq_memo:
            return self.seq_memo[key]
        total = 0
        for m in self._ends(body[k], i, j):
            first = self.count(body[k], i, m)
            if first:
                total += first * self.seq(pid, k + 1, m, j)
                if total >= 2:
                    break
        self.seq_memo[key] = min(total, 2)
        return self.seq_memo[key]

    def _ends(self, sym: str, i: int, j: int) -> List[int]:
        if self.terminal[sym]:
            return [i + 1] if i < j else []
        return sorted(m for m in self.done.get((sym, i), ()) if m <= j)

    def tree(self, sym: str, i: int, j: int) -> ParseTree:
        if self.terminal[sym]:
            return Leaf(self.tokens[i])
        for p in self.s.by_head(sym):
            if self.seq(p.id, 0, i, j):
                return Node(p.id, tuple(self._children(p.id, 0, i, j)))
        raise AssertionError(f"no derivation of {sym} over {i}..{j}")

    def _children(self, pid: int, k: int, i: int, j: int) -> List[ParseTree]:
        body = self.s.production(pid).body
        if k == len(body):
            return []
        for m in self._ends(body[k], i, j):
            if self.count(body[k], i, m) and self.seq(pid, k + 1, m, j):
                return [self.tree(body[k], i, m)] + self._children(pid, k + 1, m, j)
        raise AssertionError("broken derivation")


def parse(s: Sketch, tokens: Sequence[Token]) -> ParseTree:
    """Parse tokens into the unique tree rooted at the start symbol.

    Raises:
        NoParse: If the tokens are not in the language; `position` is the input
            offset where the furthest chart set stalled.
        Ambiguous: If the parse forest holds two or more trees.
    """
    tokens = list(tokens)
    chart = _Chart(s, tokens)
    chart.run()
    n = len(tokens)
    done = chart.completed()
    if n not in done.get((s.start, 0), ()):
        furthest = max(j for j, items in enumerate(chart.sets) if items)
        if furthest < n:
            position = tokens[furthest].position
        else:
            position = tokens[-1].position + len(tokens[-1].lexeme) if tokens else 0
        prods = s.productions
        expected = sorted(
            {
                prods[pi].body[dot]
                for pi, dot, _ in chart.sets[furthest]
                if dot < len(prods[pi].body) and chart.terminal[prods[pi].body[dot]]
            }
        )
        raise NoParse(position, expected)
    forest = _Forest(s, tokens, done)
    if forest.count(s.start, 0, n) > 1:
        raise Ambiguous(" ".join(t.lexeme for t in tokens))
    return forest.tree(s.start, 0, n)


def parse_text(s: Sketch, text: str) -> ParseTree:
    """Tokenize and parse an input string."""
    return parse(s, tokenize(s, text))


def leftmost_derivation(t: ParseTree) -> List[int]:
    """Production ids of the tree in preorder (its leftmost derivation)."""
    out: List[int] = []
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, Node):
            out.append(node.prod)
            stack.extend(reversed(node.children))
    return out


def prod_set(t: ParseTree) -> frozenset:
    """Set of productions used by the tree."""
    return frozenset(leftmost_derivation(t))


def leaves(t: ParseTree) -> List[Token]:
    if isinstance(t, Leaf):
        return [t.token]
    out: List[Token] = []
    for c in t.children:
        out.extend(leaves(c))
    return out
