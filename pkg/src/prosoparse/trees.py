"""Constituency trees and the linearized symbol sequences the parser works on.

A tree leaf is a bare token node; a pre-terminal is an internal node whose
single child is a leaf (its label is the POS tag, or ``XX`` after
normalization).  Linearized parses are flat symbol lists over the vocabulary
``{"(LABEL", ")", "XX"}`` rendered depth-first, with terminals omitted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

EDIT_LABEL = "EDITED"
XX = "XX"
CLOSE = ")"
FALLBACK_ROOT = "(S"


class TreeError(Exception):
    """Malformed tree or invalid linearized parse."""


@dataclass
class Tree:
    """Ordered labeled constituency tree.

    Exactly one of ``label`` (internal node) or ``token`` (leaf) is set.
    ``span`` is the half-open token interval covered by the node; it is
    filled in by :meth:`assign_spans` and kept current by the constructors
    used throughout this package.
    """

    label: str | None
    children: list["Tree"] = field(default_factory=list)
    token: str | None = None
    span: tuple[int, int] | None = None

    @staticmethod
    def leaf(token: str) -> "Tree":
        return Tree(label=None, children=[], token=token)

    @staticmethod
    def phrase(label: str, children: list["Tree"]) -> "Tree":
        if not children:
            raise TreeError("constituent %r must have at least one child" % label)
        return Tree(label=label, children=list(children), token=None)

    @property
    def is_leaf(self) -> bool:
        return self.token is not None

    @property
    def is_preterminal(self) -> bool:
        return (
            self.token is None
            and len(self.children) == 1
            and self.children[0].is_leaf
        )

    def leaves(self) -> list[str]:
        if self.is_leaf:
            return [self.token]
        out = []
        stack = [self]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node.token)
            else:
                stack.extend(reversed(node.children))
        return out

    def assign_spans(self, start: int = 0) -> int:
        """Fill ``span`` bottom-up; returns the end position."""
        if self.is_leaf:
            self.span = (start, start + 1)
            return start + 1
        pos = start
        for child in self.children:
            pos = child.assign_spans(pos)
        self.span = (start, pos)
        return pos

    def iter_nodes(self):
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def validate(self) -> None:
        """Check the structural invariants; raises TreeError on violation."""
        if self.is_leaf:
            if self.children:
                raise TreeError("leaf %r has children" % self.token)
            return
        if self.token is not None:
            raise TreeError("internal node %r carries a token" % self.label)
        if not self.children:
            raise TreeError("internal node %r has no children" % self.label)
        if self.label is None:
            raise TreeError("internal node without a label")
        for child in self.children:
            child.validate()

    def copy(self) -> "Tree":
        if self.is_leaf:
            t = Tree.leaf(self.token)
        else:
            t = Tree.phrase(self.label, [c.copy() for c in self.children])
        t.span = self.span
        return t

    def to_bracketed(self) -> str:
        if self.is_leaf:
            return self.token
        inner = " ".join(c.to_bracketed() for c in self.children)
        return "(%s %s)" % (self.label, inner)

    def __str__(self) -> str:
        return self.to_bracketed()


def _tokenize_bracketed(text: str):
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            yield ch
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            yield text[i:j]
            i = j


def parse_bracketed(text: str) -> Tree:
    """Parse one bracketed tree, e.g. ``(S (NP (PRP i)) (VP (VBP know)))``.

    An anonymous outer wrapper ``( (S ...) )`` with a single child is
    unwrapped.  Raises TreeError on unbalanced brackets, empty input, or
    trailing material.
    """
    tokens = list(_tokenize_bracketed(text))
    if not tokens:
        raise TreeError("empty tree")
    pos = 0

    def parse_node():
        nonlocal pos
        if tokens[pos] != "(":
            raise TreeError("expected '(' at symbol %d" % pos)
        pos += 1
        label = None
        if pos < len(tokens) and tokens[pos] not in "()":
            label = tokens[pos]
            pos += 1
        children: list[Tree] = []
        while pos < len(tokens) and tokens[pos] != ")":
            if tokens[pos] == "(":
                children.append(parse_node())
            else:
                children.append(Tree.leaf(tokens[pos]))
                pos += 1
        if pos >= len(tokens):
            raise TreeError("unbalanced brackets: missing ')'")
        pos += 1  # consume ')'
        if label is None:
            if len(children) == 1 and not children[0].is_leaf:
                return children[0]  # anonymous PTB wrapper
            raise TreeError("constituent without a label")
        if not children:
            raise TreeError("empty constituent (%s)" % label)
        return Tree.phrase(label, children)

    tree = parse_node()
    if pos != len(tokens):
        raise TreeError("trailing material after tree (one tree per line)")
    tree.validate()
    tree.assign_spans()
    return tree


# ---------------------------------------------------------------------------
# Linearization

def linearize(tree: Tree) -> list[str]:
    """Render a tree as the depth-first symbol sequence consumed by the model.

    Pre-terminals collapse to a single ``XX``; terminals are omitted.
    """
    out: list[str] = []

    def emit(node: Tree) -> None:
        if node.is_leaf or node.is_preterminal:
            out.append(XX)
            return
        out.append("(" + node.label)
        for child in node.children:
            emit(child)
        out.append(CLOSE)

    emit(tree)
    return out


def delinearize(symbols: list[str], tokens: list[str]) -> Tree:
    """Rebuild a tree from a valid linearized parse plus the sentence tokens.

    The i-th ``XX`` becomes a pre-terminal tagged ``XX`` over ``tokens[i]``.
    Raises TreeError if the sequence is not a valid single-rooted parse with
    matching XX count (callers must run :func:`repair` first).
    """
    n_xx = sum(1 for s in symbols if s == XX)
    if n_xx != len(tokens):
        raise TreeError(
            "parse has %d XX slots for %d tokens" % (n_xx, len(tokens))
        )
    if not symbols or not symbols[0].startswith("("):
        raise TreeError("parse does not start with an opening bracket")
    stack: list[tuple[str, list[Tree]]] = []
    root: Tree | None = None
    it = iter(tokens)
    for i, sym in enumerate(symbols):
        if root is not None:
            raise TreeError("material after the root closes at symbol %d" % i)
        if sym == XX:
            node = Tree.phrase(XX, [Tree.leaf(next(it))])
            stack[-1][1].append(node)
        elif sym == CLOSE:
            if not stack:
                raise TreeError("unmatched ')' at symbol %d" % i)
            label, children = stack.pop()
            if not children:
                raise TreeError("empty constituent (%s at symbol %d)" % (label, i))
            node = Tree.phrase(label, children)
            if stack:
                stack[-1][1].append(node)
            else:
                root = node
        elif sym.startswith("(") and len(sym) > 1:
            stack.append((sym[1:], []))
        else:
            raise TreeError("unknown parse symbol %r" % sym)
    if root is None:
        raise TreeError("unbalanced parse: %d bracket(s) left open" % len(stack))
    root.assign_spans()
    return root


def _drop_empty_pairs(symbols: list[str]) -> list[str]:
    # remove "(L )" pairs until none remain; cannot change balance or XX count
    changed = True
    while changed:
        changed = False
        out: list[str] = []
        for sym in symbols:
            if sym == CLOSE and out and out[-1].startswith("("):
                out.pop()
                changed = True
            else:
                out.append(sym)
        symbols = out
    return symbols


def _is_single_rooted(symbols: list[str]) -> bool:
    if not symbols or not symbols[0].startswith("("):
        return False
    depth = 0
    for i, sym in enumerate(symbols):
        if sym == CLOSE:
            depth -= 1
        elif sym.startswith("("):
            depth += 1
        if depth == 0 and i < len(symbols) - 1:
            return False
    return depth == 0


def repair(symbols: list[str], num_tokens: int) -> list[str]:
    """Force an arbitrary decoder symbol sequence into a valid parse.

    Fixes, in order: unmatched closing brackets are dropped, unclosed opens
    are closed by appending ``)``, empty constituents are pruned, a non
    single-rooted sequence is wrapped in a fresh root, and the XX count is
    adjusted end-first to ``num_tokens``.  Total: any input and any
    ``num_tokens >= 1`` yields a valid parse; valid parses pass through
    unchanged.
    """
    if num_tokens < 1:
        raise ValueError("num_tokens must be >= 1")
    fallback = [FALLBACK_ROOT] + [XX] * num_tokens + [CLOSE]

    out: list[str] = []
    depth = 0
    for sym in symbols:
        if sym == CLOSE:
            if depth == 0:
                continue  # unmatched close
            depth -= 1
            out.append(sym)
        elif sym == XX:
            out.append(sym)
        elif sym.startswith("(") and len(sym) > 1:
            depth += 1
            out.append(sym)
        # anything else (start/end markers, junk) cannot appear in a tree
    out.extend([CLOSE] * depth)
    out = _drop_empty_pairs(out)
    if not out:
        return fallback
    if not _is_single_rooted(out):
        out = [FALLBACK_ROOT] + out + [CLOSE]

    n_xx = sum(1 for s in out if s == XX)
    if n_xx < num_tokens:
        out[-1:-1] = [XX] * (num_tokens - n_xx)
    elif n_xx > num_tokens:
        excess = n_xx - num_tokens
        for i in range(len(out) - 1, -1, -1):
            if excess == 0:
                break
            if out[i] == XX:
                out[i] = None
                excess -= 1
        out = _drop_empty_pairs([s for s in out if s is not None])
    return out


def is_valid_parse(symbols: list[str], num_tokens: int) -> bool:
    """True iff delinearize would accept the sequence for num_tokens tokens."""
    if not _is_single_rooted(symbols):
        return False
    if sum(1 for s in symbols if s == XX) != num_tokens:
        return False
    prev = None
    for sym in symbols:
        if sym == CLOSE and prev is not None and prev.startswith("("):
            return False  # empty constituent
        if not (sym == CLOSE or sym == XX or (sym.startswith("(") and len(sym) > 1)):
            return False
        prev = sym
    return True


# ---------------------------------------------------------------------------
# EDITED-node handling for evaluation

def contains_edit(tree: Tree) -> bool:
    return any(node.label == EDIT_LABEL for node in tree.iter_nodes())


def flatten_edits(tree: Tree) -> Tree:
    """Collapse everything below EDITED nodes to immediate pre-terminals.

    Applied top-down, so nested EDITED nodes merge into the outermost one.
    The leaf sequence is preserved exactly.
    """

    def rebuild(node: Tree) -> Tree:
        if node.is_leaf:
            return Tree.leaf(node.token)
        if node.label == EDIT_LABEL:
            kids = [Tree.phrase(XX, [Tree.leaf(tok)]) for tok in node.leaves()]
            return Tree.phrase(EDIT_LABEL, kids)
        return Tree.phrase(node.label, [rebuild(c) for c in node.children])

    out = rebuild(tree)
    out.assign_spans()
    return out


def format_symbols(symbols: list[str]) -> str:
    return " ".join(symbols)


def parse_symbols(text: str) -> list[str]:
    return text.split()
