"""Symbol expressions F(x, xi): parsing, evaluation, exact differentiation.

Variables are spelled ``x1..xn`` and ``p1..pn`` (``p`` stands for xi).
Nodes are hash-consed so repeated differentiation produces a DAG with
shared subexpressions; evaluation compiles the DAG into straight-line
numpy code, one temporary per distinct node.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np

if TYPE_CHECKING:
    from .phase import PhaseGrid

FUNCTIONS = ("exp", "sin", "cos", "sqrt", "atan")

BUILTIN_POTENTIALS = {
    "gauss": "exp(-y^2)",
    "lorentz": "1/(1+y^2)",
    "cos2": "1+cos(y)",
}

MAX_ORDER_PER_VARIABLE = 4


class SymbolError(Exception):
    pass


class SymbolSyntaxError(SymbolError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class UnknownIdentifierError(SymbolError):
    pass


class VariableIndexError(SymbolError):
    pass


class SymbolEvalError(SymbolError, ArithmeticError):
    def __init__(self, message: str, point: Mapping[str, float] | None = None):
        if point:
            coords = ", ".join(f"{k}={v:.6g}" for k, v in point.items())
            message = f"{message} at ({coords})"
        super().__init__(message)
        self.point = point


# ---------------------------------------------------------------------------
# Interned expression nodes
# ---------------------------------------------------------------------------


class Node:
    __slots__ = ("op", "args", "value")

    def __init__(self, op, args, value):
        self.op = op
        self.args = args
        self.value = value

    def __repr__(self):
        return f"Node({to_text(self)})"


_INTERN: dict[tuple, Node] = {}


def _mk(op: str, args: tuple[Node, ...] = (), value=None) -> Node:
    key = (op, tuple(id(a) for a in args), value)
    node = _INTERN.get(key)
    if node is None:
        node = _INTERN[key] = Node(op, args, value)
    return node


def const(v: float) -> Node:
    v = float(v)
    if v == 0.0:
        v = 0.0  # fold -0.0
    return _mk("const", (), v)


def var(kind: str, index: int) -> Node:
    return _mk("var", (), (kind, int(index)))


ZERO, ONE = const(0.0), const(1.0)


def _is_const(a: Node, v: float | None = None) -> bool:
    return a.op == "const" and (v is None or a.value == v)


def add(a: Node, b: Node) -> Node:
    if _is_const(a) and _is_const(b):
        return const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return _mk("add", (a, b))


def neg(a: Node) -> Node:
    if _is_const(a):
        return const(-a.value)
    if a.op == "neg":
        return a.args[0]
    return _mk("neg", (a,))


def sub(a: Node, b: Node) -> Node:
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    if _is_const(a) and _is_const(b):
        return const(a.value - b.value)
    return _mk("sub", (a, b))


def mul(a: Node, b: Node) -> Node:
    if _is_const(a) and _is_const(b):
        return const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a, -1.0):
        return neg(b)
    if _is_const(b, -1.0):
        return neg(a)
    return _mk("mul", (a, b))


def div(a: Node, b: Node) -> Node:
    if _is_const(b, 0.0):
        raise SymbolEvalError("division by zero")
    if _is_const(a, 0.0):
        return ZERO
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b):
        return const(a.value / b.value)
    return _mk("div", (a, b))


def ipow(a: Node, k: int) -> Node:
    k = int(k)
    if k == 0:
        return ONE
    if k == 1:
        return a
    if _is_const(a):
        if a.value == 0.0 and k < 0:
            raise SymbolEvalError("division by zero")
        return const(a.value**k)
    return _mk("pow", (a,), k)


def func(name: str, a: Node) -> Node:
    if name not in FUNCTIONS:
        raise UnknownIdentifierError(name)
    if _is_const(a):
        v = a.value
        if name == "sqrt" and v < 0:
            raise SymbolEvalError("sqrt of negative value")
        return const(getattr(math, name)(v))
    return _mk(name, (a,))


def substitute(node: Node, mapping: Mapping[tuple[str, int], Node]) -> Node:
    memo: dict[int, Node] = {}

    def go(a: Node) -> Node:
        r = memo.get(id(a))
        if r is not None:
            return r
        if a.op == "const":
            r = a
        elif a.op == "var":
            r = mapping.get(a.value, a)
        else:
            r = _rebuild(a, [go(c) for c in a.args])
        memo[id(a)] = r
        return r

    return go(node)


def _rebuild(a: Node, args: Sequence[Node]) -> Node:
    op = a.op
    if op == "add":
        return add(*args)
    if op == "sub":
        return sub(*args)
    if op == "mul":
        return mul(*args)
    if op == "div":
        return div(*args)
    if op == "neg":
        return neg(args[0])
    if op == "pow":
        return ipow(args[0], a.value)
    return func(op, args[0])


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------

_DERIV: dict[tuple[int, tuple[str, int]], Node] = {}


def derivative(a: Node, v: tuple[str, int]) -> Node:
    key = (id(a), v)
    hit = _DERIV.get(key)
    if hit is not None:
        return hit
    op = a.op
    if op == "const":
        d = ZERO
    elif op == "var":
        d = ONE if a.value == v else ZERO
    elif op == "add":
        d = add(derivative(a.args[0], v), derivative(a.args[1], v))
    elif op == "sub":
        d = sub(derivative(a.args[0], v), derivative(a.args[1], v))
    elif op == "neg":
        d = neg(derivative(a.args[0], v))
    elif op == "mul":
        f, g = a.args
        d = add(mul(derivative(f, v), g), mul(f, derivative(g, v)))
    elif op == "div":
        f, g = a.args
        df, dg = derivative(f, v), derivative(g, v)
        d = sub(div(df, g), div(mul(f, dg), ipow(g, 2)))
    elif op == "pow":
        f = a.args[0]
        d = mul(mul(const(a.value), ipow(f, a.value - 1)), derivative(f, v))
    else:
        f = a.args[0]
        df = derivative(f, v)
        if _is_const(df, 0.0):
            d = ZERO
        elif op == "exp":
            d = mul(a, df)
        elif op == "sin":
            d = mul(func("cos", f), df)
        elif op == "cos":
            d = neg(mul(func("sin", f), df))
        elif op == "sqrt":
            d = div(df, mul(const(2.0), a))
        elif op == "atan":
            d = div(df, add(ONE, ipow(f, 2)))
        else:  # pragma: no cover - closed function set
            raise SymbolError(f"cannot differentiate {op}")
    _DERIV[key] = d
    return d


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}


def to_text(a: Node) -> str:
    op = a.op
    if op == "const":
        v = a.value
        return repr(int(v)) if v.is_integer() and abs(v) < 1e15 else repr(v)
    if op == "var":
        kind, i = a.value
        return f"{kind}{i}" if kind != "y" else "y"
    if op in FUNCTIONS:
        return f"{op}({to_text(a.args[0])})"

    def wrap(c: Node, p: int, right: bool = False) -> str:
        s = to_text(c)
        cp = _PREC.get(c.op, 5)
        if c.op == "const" and c.value < 0:
            cp = 3
        if cp < p or (right and cp == p and op in ("sub", "div")):
            return f"({s})"
        return s

    p = _PREC[op]
    if op == "neg":
        return "-" + wrap(a.args[0], p)
    if op == "pow":
        return f"{wrap(a.args[0], p + 1)}^{a.value}" if a.value >= 0 else f"{wrap(a.args[0], p + 1)}^({a.value})"
    sym = {"add": " + ", "sub": " - ", "mul": "*", "div": "/"}[op]
    return wrap(a.args[0], p) + sym + wrap(a.args[1], p, right=True)


# ---------------------------------------------------------------------------
# Public expression wrapper
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymbolContext:
    n: int
    potentials: Mapping[str, str] = field(default_factory=lambda: dict(BUILTIN_POTENTIALS))

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")

    def potential(self, name: str) -> Node:
        if name not in self.potentials:
            raise UnknownIdentifierError(f"unknown potential {name!r}; have {sorted(self.potentials)}")
        return _parse(self.potentials[name], n=0, potentials={}, allow_y=True)


@dataclass(frozen=True, eq=False)
class SymbolExpr:
    root: Node
    n: int

    def __str__(self):
        return to_text(self.root)

    def __repr__(self):
        return f"SymbolExpr({to_text(self.root)!r}, n={self.n})"

    def __call__(self, X: Sequence[np.ndarray], P: Sequence[np.ndarray]) -> np.ndarray:
        return evaluate_arrays(self, X, P)

    # light algebra so builders read naturally
    def _lift(self, other) -> Node:
        if isinstance(other, SymbolExpr):
            if other.n != self.n:
                raise ValueError("dimension mismatch")
            return other.root
        return const(other)

    def __add__(self, o):
        return SymbolExpr(add(self.root, self._lift(o)), self.n)

    __radd__ = __add__

    def __sub__(self, o):
        return SymbolExpr(sub(self.root, self._lift(o)), self.n)

    def __rsub__(self, o):
        return SymbolExpr(sub(self._lift(o), self.root), self.n)

    def __mul__(self, o):
        return SymbolExpr(mul(self.root, self._lift(o)), self.n)

    __rmul__ = __mul__

    def __truediv__(self, o):
        return SymbolExpr(div(self.root, self._lift(o)), self.n)

    def __neg__(self):
        return SymbolExpr(neg(self.root), self.n)

    def is_zero(self) -> bool:
        return _is_const(self.root, 0.0)

    def same_as(self, other: "SymbolExpr") -> bool:
        return self.root is other.root

    def apply(self, name: str) -> "SymbolExpr":
        return SymbolExpr(func(name, self.root), self.n)

    def dag_size(self) -> int:
        return len(_topo([self.root]))


def x_var(j: int, n: int) -> SymbolExpr:
    return SymbolExpr(var("x", j), n)


def p_var(j: int, n: int) -> SymbolExpr:
    return SymbolExpr(var("p", j), n)


def constant(c: float, n: int) -> SymbolExpr:
    return SymbolExpr(const(c), n)


def apply_potential(ctx: SymbolContext, name: str, arg: SymbolExpr) -> SymbolExpr:
    return SymbolExpr(substitute(ctx.potential(name), {("y", 0): arg.root}), arg.n)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>\*\*|[-+*/^(),]))"
)


def _tokenize(text: str):
    toks = []
    i = 0
    while i < len(text):
        if text[i].isspace():
            i += 1
            continue
        m = _TOKEN.match(text, i)
        if not m or m.end() == i:
            raise SymbolSyntaxError(f"unexpected character {text[i]!r}", _byte(text, i))
        kind = m.lastgroup
        val = m.group(kind)
        start = m.start(kind)
        if kind == "op" and val == "**":
            val = "^"
        toks.append((kind, val, start))
        i = m.end()
    toks.append(("end", "", len(text)))
    return toks


def _byte(text: str, i: int) -> int:
    return len(text[:i].encode("utf-8"))


class _Parser:
    def __init__(self, text, n, potentials, allow_y):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.n = n
        self.potentials = potentials
        self.allow_y = allow_y

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise SymbolSyntaxError(msg, _byte(self.text, tok[2]))

    def expect(self, val):
        t = self.peek()
        if t[0] == "end" or t[1] != val:
            self.fail(f"expected {val!r}" + (" but reached end of input" if t[0] == "end" else f", got {t[1]!r}"))
        return self.take()

    def parse(self) -> Node:
        if self.peek()[0] == "end":
            self.fail("empty expression")
        e = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return e

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            r = self.term()
            e = add(e, r) if op == "+" else sub(e, r)
        return e

    def term(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            r = self.unary()
            if op == "*":
                e = mul(e, r)
            else:
                if _is_const(r, 0.0):
                    self.fail("division by literal zero")
                e = div(e, r)
        return e

    def unary(self):
        t = self.peek()
        if t[0] == "op" and t[1] == "-":
            self.take()
            return neg(self.unary())
        if t[0] == "op" and t[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            return ipow(base, self.exponent())
        return base

    def exponent(self) -> int:
        t = self.peek()
        if t[0] == "op" and t[1] == "(":
            self.take()
            k = self.signed_int()
            self.expect(")")
        else:
            k = self.signed_int()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            k = k ** self.exponent()
        return k

    def signed_int(self) -> int:
        sign = 1
        if self.peek()[1] == "-":
            self.take()
            sign = -1
        t = self.take()
        if t[0] != "num" or not re.fullmatch(r"\d+", t[1]):
            self.fail("exponent must be an integer literal", t)
        return sign * int(t[1])

    def atom(self):
        t = self.take()
        kind, val, _ = t
        if kind == "num":
            return const(float(val))
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "id":
            if self.peek()[1] == "(" and self.peek()[0] == "op":
                self.take()
                arg = self.expr()
                self.expect(")")
                if val in FUNCTIONS:
                    try:
                        return func(val, arg)
                    except SymbolEvalError as err:
                        raise SymbolSyntaxError(str(err), _byte(self.text, t[2])) from None
                if val in self.potentials:
                    pot = _parse(self.potentials[val], 0, {}, allow_y=True)
                    return substitute(pot, {("y", 0): arg})
                raise UnknownIdentifierError(f"unknown function {val!r}")
            if val == "pi":
                return const(math.pi)
            if val == "y" and self.allow_y:
                return var("y", 0)
            m = re.fullmatch(r"([xp])(\d+)", val)
            if m:
                k = int(m.group(2))
                if k < 1 or k > self.n:
                    raise VariableIndexError(f"variable {val} out of range for n={self.n}")
                return var(m.group(1), k)
            raise UnknownIdentifierError(f"unknown identifier {val!r}")
        if kind == "end":
            self.fail("unexpected end of input", t)
        self.fail(f"unexpected {val!r}", t)


def _parse(text, n, potentials, allow_y=False) -> Node:
    return _Parser(text, n, potentials, allow_y).parse()


def parse_symbol(text: str, ctx: SymbolContext) -> SymbolExpr:
    if not text or not text.strip():
        raise SymbolSyntaxError("empty expression", 0)
    return SymbolExpr(_parse(text, ctx.n, ctx.potentials), ctx.n)


def load_symbol_file(path, ctx: SymbolContext) -> SymbolExpr:
    """Read a UTF-8 symbol file: one expression, ``#`` comment lines ignored."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if not ln.lstrip().startswith("#")]
    return parse_symbol(" ".join(lines).strip(), ctx)


# ---------------------------------------------------------------------------
# Differentiation API
# ---------------------------------------------------------------------------


def diff_symbol(F: SymbolExpr, alpha: Sequence[int], beta: Sequence[int]) -> SymbolExpr:
    alpha, beta = list(alpha), list(beta)
    if len(alpha) != F.n or len(beta) != F.n:
        raise ValueError(f"multi-indices must have length n={F.n}")
    if min(alpha + beta) < 0 or max(alpha + beta) > MAX_ORDER_PER_VARIABLE:
        raise ValueError(f"per-variable order must lie in 0..{MAX_ORDER_PER_VARIABLE}")
    node = F.root
    for kind, orders in (("x", alpha), ("p", beta)):
        for j, k in enumerate(orders, start=1):
            for _ in range(k):
                node = derivative(node, (kind, j))
    return SymbolExpr(node, F.n)


# ---------------------------------------------------------------------------
# Compiled evaluation
# ---------------------------------------------------------------------------


def _topo(roots: Iterable[Node]) -> list[Node]:
    order: list[Node] = []
    seen: set[int] = set()
    for r in roots:
        stack = [(r, False)]
        while stack:
            a, done = stack.pop()
            if id(a) in seen:
                continue
            if done:
                seen.add(id(a))
                order.append(a)
                continue
            stack.append((a, True))
            for c in a.args:
                if id(c) not in seen:
                    stack.append((c, False))
    return order


class _Guards:
    @staticmethod
    def div(a, b):
        if np.any(b == 0):
            raise SymbolEvalError("division by zero", None)
        return a / b

    @staticmethod
    def sqrt(a):
        if np.any(a < 0):
            raise SymbolEvalError("sqrt of negative value", None)
        return np.sqrt(a)

    @staticmethod
    def pow(a, k):
        if k < 0 and np.any(a == 0):
            raise SymbolEvalError("division by zero", None)
        return a**k if k >= 0 else 1.0 / a ** (-k)


_COMPILED: dict[tuple[int, ...], object] = {}


def compile_nodes(roots: Sequence[Node]):
    """Compile roots into ``fn(X, P) -> list of arrays`` (X, P: lists per variable)."""
    key = tuple(id(r) for r in roots)
    fn = _COMPILED.get(key)
    if fn is not None:
        return fn
    order = _topo(roots)
    names: dict[int, str] = {}
    lines = ["def _f(X, P):"]
    for k, a in enumerate(order):
        nm = f"t{k}"
        names[id(a)] = nm
        op = a.op
        if op == "const":
            expr = repr(a.value)
        elif op == "var":
            kind, i = a.value
            expr = f"X[{i - 1}]" if kind == "x" else f"P[{i - 1}]"
        else:
            c = [names[id(x)] for x in a.args]
            expr = {
                "add": lambda: f"{c[0]} + {c[1]}",
                "sub": lambda: f"{c[0]} - {c[1]}",
                "mul": lambda: f"{c[0]} * {c[1]}",
                "div": lambda: f"_g.div({c[0]}, {c[1]})",
                "neg": lambda: f"-{c[0]}",
                "pow": lambda: f"{c[0]} * {c[0]}" if a.value == 2 else f"_g.pow({c[0]}, {a.value})",
                "exp": lambda: f"_np.exp({c[0]})",
                "sin": lambda: f"_np.sin({c[0]})",
                "cos": lambda: f"_np.cos({c[0]})",
                "atan": lambda: f"_np.arctan({c[0]})",
                "sqrt": lambda: f"_g.sqrt({c[0]})",
            }[op]()
        lines.append(f"    {nm} = {expr}")
    lines.append("    return [" + ", ".join(names[id(r)] for r in roots) + "]")
    scope = {"_np": np, "_g": _Guards}
    exec("\n".join(lines), scope)
    fn = scope["_f"]
    _COMPILED[key] = fn
    return fn


def evaluate_many(exprs: Sequence[SymbolExpr], X: Sequence[np.ndarray], P: Sequence[np.ndarray]) -> list[np.ndarray]:
    n = exprs[0].n
    if len(X) != n or len(P) != n:
        raise ValueError(f"expected {n} position and {n} momentum arrays")
    X = [np.asarray(v, dtype=float) for v in X]
    P = [np.asarray(v, dtype=float) for v in P]
    shape = np.broadcast_shapes(*(v.shape for v in X + P))
    fn = compile_nodes([e.root for e in exprs])
    with np.errstate(all="ignore"):
        try:
            outs = fn(X, P)
        except SymbolEvalError as err:
            raise SymbolEvalError(str(err), _first_bad(exprs, X, P, shape)) from None
    res = []
    for o in outs:
        o = np.broadcast_to(np.asarray(o, dtype=float), shape)
        if not np.all(np.isfinite(o)):
            idx = np.unravel_index(np.argmin(np.isfinite(o)), shape)
            raise SymbolEvalError("non-finite result", _coords(X, P, idx, shape))
        res.append(o)
    return res


def _coords(X, P, idx, shape):
    pt = {}
    for j, v in enumerate(X, 1):
        pt[f"x{j}"] = float(np.broadcast_to(v, shape)[idx])
    for j, v in enumerate(P, 1):
        pt[f"p{j}"] = float(np.broadcast_to(v, shape)[idx])
    return pt


def _first_bad(exprs, X, P, shape):
    """Locate the first node coordinate where a guarded operation fails."""
    Xb = [np.broadcast_to(v, shape).ravel() for v in X]
    Pb = [np.broadcast_to(v, shape).ravel() for v in P]
    fn = compile_nodes([e.root for e in exprs])
    for k in range(Xb[0].size if Xb else 1):
        try:
            with np.errstate(all="ignore"):
                fn([v[k : k + 1] for v in Xb], [v[k : k + 1] for v in Pb])
        except SymbolEvalError:
            return {**{f"x{j}": float(v[k]) for j, v in enumerate(Xb, 1)}, **{f"p{j}": float(v[k]) for j, v in enumerate(Pb, 1)}}
    return None


def evaluate_arrays(F: SymbolExpr, X: Sequence[np.ndarray], P: Sequence[np.ndarray]) -> np.ndarray:
    return evaluate_many([F], X, P)[0]


def eval_symbol(F: SymbolExpr, Z) -> complex:
    """Evaluate at a single phase point ``Z`` (a PhasePoint)."""
    if Z.n != F.n:
        raise ValueError(f"point dimension {Z.n} != symbol dimension {F.n}")
    v = evaluate_arrays(F, list(Z.x), list(Z.xi))
    return complex(float(v))


# ---------------------------------------------------------------------------
# Sampling onto phase grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SampledSymbol:
    """Symbol values on a PhaseGrid, array shaped like the grid (interleaved axes)."""

    grid: "PhaseGrid"
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).reshape(self.grid.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("sampled symbol has non-finite entries")
        object.__setattr__(self, "values", v)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def with_values(self, values) -> "SampledSymbol":
        return SampledSymbol(self.grid, values)

    def __add__(self, other: "SampledSymbol") -> "SampledSymbol":
        if other.grid != self.grid:
            raise ValueError("grid mismatch")
        return SampledSymbol(self.grid, self.values + other.values)

    def __sub__(self, other: "SampledSymbol") -> "SampledSymbol":
        if other.grid != self.grid:
            raise ValueError("grid mismatch")
        return SampledSymbol(self.grid, self.values - other.values)

    def __rmul__(self, c) -> "SampledSymbol":
        return SampledSymbol(self.grid, c * self.values)


def sample_symbol(F: SymbolExpr, grid: "PhaseGrid") -> SampledSymbol:
    if grid.n != F.n:
        raise ValueError(f"grid dimension 2*{grid.n} does not match symbol n={F.n}")
    nodes = [ax.nodes for ax in grid.axes]
    # broadcastable open mesh keeps memory at one output array
    mesh = np.ix_(*nodes)
    X, P = list(mesh[0::2]), list(mesh[1::2])
    return SampledSymbol(grid, evaluate_arrays(F, X, P))
