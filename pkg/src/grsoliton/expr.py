"""Scalar expression trees over chart coordinates and named parameters.

Grammar (infix):
    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?          # '^' is right-associative
    atom   := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Unary minus binds looser than '^', so ``-x^2`` means ``-(x^2)``.
Known functions: exp, ln, sin, cos, tan, cot, sqrt.  The names ``pi`` and
``e`` are constants, not symbols.  Everything else is a free symbol to be
bound at evaluation time (a chart coordinate or a named parameter).

Expressions are immutable; operations never mutate their inputs, so trees
may share subexpressions freely (differentiation and simplification
preserve that sharing via per-call memoisation).
"""

import math
import re

import numpy as np

FUNCTIONS = ("exp", "ln", "sin", "cos", "tan", "cot", "sqrt")
CONSTANTS = {"pi": math.pi, "e": math.e}
RESERVED_NAMES = frozenset(FUNCTIONS) | frozenset(CONSTANTS)

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER_RE = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")


class ExpressionError(Exception):
    """Base class for expression-layer failures."""


class ParseError(ExpressionError):
    """Syntax error; carries the byte offset and the expected-token set."""

    def __init__(self, message, offset, expected=()):
        super().__init__(message)
        self.offset = offset
        self.expected = tuple(expected)


class UnknownFunctionError(ParseError):
    """A name was applied like a function but is not a known function."""


class UnboundSymbolError(ExpressionError):
    """Evaluation hit a symbol with no binding in the environment."""

    def __init__(self, name):
        super().__init__(f"unbound symbol {name!r}")
        self.name = name


class DomainError(ExpressionError):
    """Evaluation left the domain of a subexpression at a concrete point."""

    def __init__(self, message, subexpression, point):
        super().__init__(f"{message} in {render(subexpression)!r} at {point}")
        self.subexpression = subexpression
        self.point = dict(point)


class Expression:
    __slots__ = ()
    precedence = 10

    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __pow__(self, other):
        return pow_(self, _coerce(other))

    def __neg__(self):
        return neg(self)

    def __str__(self):
        return render(self)

    def __repr__(self):
        return f"<{type(self).__name__} {render(self)!r}>"


class Num(Expression):
    __slots__ = ("value",)
    precedence = 10

    def __init__(self, value):
        self.value = float(value)


class Sym(Expression):
    __slots__ = ("name",)
    precedence = 10

    def __init__(self, name):
        self.name = name


class Neg(Expression):
    __slots__ = ("arg",)
    precedence = 1.5

    def __init__(self, arg):
        self.arg = arg


class _Binary(Expression):
    __slots__ = ("left", "right")
    symbol = "?"

    def __init__(self, left, right):
        self.left = left
        self.right = right


class Add(_Binary):
    __slots__ = ()
    symbol = "+"
    precedence = 1


class Sub(_Binary):
    __slots__ = ()
    symbol = "-"
    precedence = 1


class Mul(_Binary):
    __slots__ = ()
    symbol = "*"
    precedence = 2


class Div(_Binary):
    __slots__ = ()
    symbol = "/"
    precedence = 2


class Pow(_Binary):
    __slots__ = ()
    symbol = "^"
    precedence = 4


class Call(Expression):
    __slots__ = ("func", "arg")
    precedence = 10

    def __init__(self, func, arg):
        self.func = func
        self.arg = arg


ZERO = Num(0.0)
ONE = Num(1.0)


def _coerce(value):
    if isinstance(value, Expression):
        return value
    if isinstance(value, (int, float)):
        return Num(value)
    raise TypeError(f"cannot use {type(value).__name__} as an expression")


def _is_num(e, value=None):
    return isinstance(e, Num) and (value is None or e.value == value)


# Smart constructors: prune additive/multiplicative identities at build
# time so derived tensors stay small.  Full rewriting lives in simplify().

def add(a, b):
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return Add(a, b)


def sub(a, b):
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    return Sub(a, b)


def mul(a, b):
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return ZERO
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    return Mul(a, b)


def div(a, b):
    if _is_num(a, 0.0) and not _is_num(b, 0.0):
        return ZERO
    if _is_num(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0.0:
        return Num(a.value / b.value)
    return Div(a, b)


def pow_(a, b):
    if _is_num(b, 1.0):
        return a
    if _is_num(b, 0.0):
        return ONE
    return Pow(a, b)


def neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def call(func, arg):
    if func not in FUNCTIONS:
        raise ValueError(f"unknown function {func!r}")
    return Call(func, arg)


def free_symbols(e):
    """Set of symbol names appearing in the tree."""
    memo = {}

    def walk(node):
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        if isinstance(node, Sym):
            out = frozenset((node.name,))
        elif isinstance(node, Num):
            out = frozenset()
        elif isinstance(node, Neg):
            out = walk(node.arg)
        elif isinstance(node, Call):
            out = walk(node.arg)
        else:
            out = walk(node.left) | walk(node.right)
        memo[id(node)] = out
        return out

    return walk(e)


def differentiate(e, var):
    """Exact derivative of e with respect to the symbol named var."""
    if not isinstance(var, str) or not _NAME_RE.fullmatch(var):
        raise ValueError(f"invalid differentiation variable {var!r}")
    memo = {}

    def d(node):
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        if isinstance(node, Num):
            out = ZERO
        elif isinstance(node, Sym):
            out = ONE if node.name == var else ZERO
        elif isinstance(node, Neg):
            out = neg(d(node.arg))
        elif isinstance(node, Add):
            out = add(d(node.left), d(node.right))
        elif isinstance(node, Sub):
            out = sub(d(node.left), d(node.right))
        elif isinstance(node, Mul):
            out = add(mul(d(node.left), node.right), mul(node.left, d(node.right)))
        elif isinstance(node, Div):
            da, db = d(node.left), d(node.right)
            if _is_num(db, 0.0):
                out = div(da, node.right)
            else:
                out = div(sub(mul(da, node.right), mul(node.left, db)),
                          mul(node.right, node.right))
        elif isinstance(node, Pow):
            out = _pow_derivative(node, d(node.left), d(node.right))
        elif isinstance(node, Call):
            out = _call_derivative(node, d(node.arg))
        else:  # pragma: no cover - exhaustive over node kinds
            raise TypeError(f"cannot differentiate {type(node).__name__}")
        memo[id(node)] = out
        return out

    return d(e)


def _pow_derivative(node, da, db):
    base, expo = node.left, node.right
    if isinstance(expo, Num):
        # power rule keeps negative bases legal for integer exponents
        return mul(mul(expo, pow_(base, Num(expo.value - 1.0))), da)
    terms = ZERO
    if not _is_num(db, 0.0):
        terms = add(terms, mul(db, Call("ln", base)))
    if not _is_num(da, 0.0):
        terms = add(terms, div(mul(expo, da), base))
    return mul(node, terms)


def _call_derivative(node, da):
    a = node.arg
    if node.func == "exp":
        return mul(node, da)
    if node.func == "ln":
        return div(da, a)
    if node.func == "sin":
        return mul(Call("cos", a), da)
    if node.func == "cos":
        return neg(mul(Call("sin", a), da))
    if node.func == "tan":
        return div(da, mul(Call("cos", a), Call("cos", a)))
    if node.func == "cot":
        return neg(div(da, mul(Call("sin", a), Call("sin", a))))
    if node.func == "sqrt":
        return div(da, mul(Num(2.0), node))
    raise ValueError(f"unknown function {node.func!r}")  # pragma: no cover


def simplify(e):
    """Constant folding plus the identity rules x+0, x*1, x*0, 0/x, x^1, x^0.

    Purely structural: the result evaluates identically to the input at
    every point where the input is defined.  Returns the original node when
    nothing below it changed, preserving subtree sharing.
    """
    memo = {}

    def s(node):
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        if isinstance(node, (Num, Sym)):
            out = node
        elif isinstance(node, Neg):
            a = s(node.arg)
            if isinstance(a, Num):
                out = Num(-a.value)
            elif isinstance(a, Neg):
                out = a.arg
            else:
                out = node if a is node.arg else Neg(a)
        elif isinstance(node, Call):
            a = s(node.arg)
            out = node if a is node.arg else Call(node.func, a)
        else:
            a, b = s(node.left), s(node.right)
            out = _simplify_binary(node, a, b)
        memo[id(node)] = out
        return out

    return s(e)


def _simplify_binary(node, a, b):
    kind = type(node)
    if kind is Add:
        folded = add(a, b)
    elif kind is Sub:
        folded = sub(a, b)
    elif kind is Mul:
        folded = mul(a, b)
    elif kind is Div:
        folded = div(a, b)
    else:
        folded = pow_(a, b)
        if isinstance(a, Num) and isinstance(b, Num):
            v = _float_pow(a.value, b.value)
            if v is not None:
                return Num(v)
    if isinstance(folded, _Binary) and folded.left is a and folded.right is b \
            and type(folded) is kind and a is node.left and b is node.right:
        return node
    return folded


def _float_pow(base, expo):
    try:
        v = math.pow(base, expo)
    except (ValueError, OverflowError):
        return None
    return v if math.isfinite(v) else None


def evaluate(e, env):
    """Scalar IEEE-double evaluation; env maps symbol names to floats.

    Raises DomainError (carrying the offending subexpression and point)
    for ln/sqrt/cot domain violations, division by zero, and fractional
    powers of negative numbers.
    """
    memo = {}

    def ev(node):
        hit = memo.get(id(node))
        if hit is not None:
            return hit
        if isinstance(node, Num):
            out = node.value
        elif isinstance(node, Sym):
            try:
                out = float(env[node.name])
            except KeyError:
                raise UnboundSymbolError(node.name) from None
        elif isinstance(node, Neg):
            out = -ev(node.arg)
        elif isinstance(node, Add):
            out = ev(node.left) + ev(node.right)
        elif isinstance(node, Sub):
            out = ev(node.left) - ev(node.right)
        elif isinstance(node, Mul):
            out = ev(node.left) * ev(node.right)
        elif isinstance(node, Div):
            denom = ev(node.right)
            if denom == 0.0:
                raise DomainError("division by zero", node, env)
            out = ev(node.left) / denom
        elif isinstance(node, Pow):
            out = _eval_pow(node, ev(node.left), ev(node.right), env)
        else:
            out = _eval_call(node, ev(node.arg), env)
        memo[id(node)] = out
        return out

    return ev(e)


def _eval_pow(node, base, expo, env):
    if base == 0.0 and expo < 0.0:
        raise DomainError("zero raised to a negative power", node, env)
    if base < 0.0 and expo != math.floor(expo):
        raise DomainError("fractional power of a negative number", node, env)
    try:
        return math.pow(base, expo)
    except OverflowError:
        raise DomainError("overflow", node, env) from None


def _eval_call(node, a, env):
    fn = node.func
    if fn == "exp":
        try:
            return math.exp(a)
        except OverflowError:
            raise DomainError("overflow in exp", node, env) from None
    if fn == "ln":
        if a <= 0.0:
            raise DomainError("log of a non-positive number", node, env)
        return math.log(a)
    if fn == "sin":
        return math.sin(a)
    if fn == "cos":
        return math.cos(a)
    if fn == "tan":
        return math.tan(a)
    if fn == "cot":
        s = math.sin(a)
        if s == 0.0:
            raise DomainError("cot at a multiple of pi", node, env)
        return math.cos(a) / s
    if fn == "sqrt":
        if a < 0.0:
            raise DomainError("square root of a negative number", node, env)
        return math.sqrt(a)
    raise ValueError(f"unknown function {fn!r}")  # pragma: no cover


_NUMPY_CALLS = {
    "exp": np.exp,
    "ln": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sqrt": np.sqrt,
}


def evaluate_many(e, env, size):
    """Vectorised evaluation over numpy arrays of shape (size,).

    env maps symbol names to scalars or (size,) arrays.  No domain checks
    are performed: invalid operations yield non-finite entries, which the
    caller is expected to mask or diagnose (the scalar evaluator pinpoints
    the offending subexpression for a single point).
    """
    return evaluate_many_multi((e,), env, size)[0]


def evaluate_many_multi(exprs, env, size):
    """Vectorised evaluation of several roots with shared-subtree reuse."""
    exprs = tuple(exprs)
    memo = {}
    with np.errstate(all="ignore"):
        for root in exprs:
            for node in _postorder(root, memo):
                if isinstance(node, Num):
                    out = node.value
                elif isinstance(node, Sym):
                    try:
                        out = env[node.name]
                    except KeyError:
                        raise UnboundSymbolError(node.name) from None
                elif isinstance(node, Neg):
                    out = -memo[id(node.arg)]
                elif isinstance(node, Add):
                    out = memo[id(node.left)] + memo[id(node.right)]
                elif isinstance(node, Sub):
                    out = memo[id(node.left)] - memo[id(node.right)]
                elif isinstance(node, Mul):
                    out = memo[id(node.left)] * memo[id(node.right)]
                elif isinstance(node, Div):
                    out = np.divide(memo[id(node.left)], memo[id(node.right)])
                elif isinstance(node, Pow):
                    out = np.power(memo[id(node.left)], memo[id(node.right)])
                elif node.func == "cot":
                    a = memo[id(node.arg)]
                    out = np.divide(np.cos(a), np.sin(a))
                else:
                    out = _NUMPY_CALLS[node.func](memo[id(node.arg)])
                memo[id(node)] = out
    results = []
    for root in exprs:
        arr = np.asarray(memo[id(root)], dtype=float)
        if arr.shape != (size,):
            arr = np.broadcast_to(arr, (size,)).copy()
        results.append(arr)
    return results


def _postorder(e, done):
    """Children-before-parents ordering of unique nodes not yet in done."""
    order = []
    scheduled = set()
    stack = [(e, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in done:
            continue
        if expanded:
            done[id(node)] = None
            order.append(node)
            continue
        if id(node) in scheduled:
            continue
        scheduled.add(id(node))
        stack.append((node, True))
        if isinstance(node, (Neg, Call)):
            stack.append((node.arg, False))
        elif isinstance(node, _Binary):
            stack.append((node.right, False))
            stack.append((node.left, False))
    return order


def render(e):
    """Infix text that reparses to an evaluation-identical tree."""
    if isinstance(e, Num):
        v = e.value
        if v.is_integer() and abs(v) < 1e16:
            return str(int(v))
        return repr(v)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, Neg.precedence)
    if isinstance(e, Call):
        return f"{e.func}({render(e.arg)})"
    if isinstance(e, Pow):
        left = _wrap(e.left, Pow.precedence, strict=True)
        right = _wrap(e.right, Pow.precedence)
        return f"{left}^{right}"
    # the parser is left-associative, so a right child of equal precedence
    # must keep its parentheses or reparsing would reassociate the floats
    left = _wrap(e.left, e.precedence)
    right = _wrap(e.right, e.precedence, strict=True)
    return f"{left} {e.symbol} {right}"


def _wrap(child, parent_prec, strict=False):
    text = render(child)
    prec = _effective_precedence(child)
    if prec < parent_prec or (strict and prec == parent_prec):
        return f"({text})"
    return text


def _effective_precedence(e):
    if isinstance(e, Num) and e.value < 0:
        return Neg.precedence
    return e.precedence


class _Token:
    __slots__ = ("kind", "text", "offset")

    def __init__(self, kind, text, offset):
        self.kind = kind
        self.text = text
        self.offset = offset


def _tokenize(text):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-*/^()":
            tokens.append(_Token(ch, ch, i))
            i += 1
            continue
        m = _NUMBER_RE.match(text, i)
        if m:
            tokens.append(_Token("number", m.group(), i))
            i = m.end()
            continue
        m = _NAME_RE.match(text, i)
        if m:
            tokens.append(_Token("name", m.group(), i))
            i = m.end()
            continue
        raise ParseError(f"illegal character {ch!r} at offset {_byte_offset(text, i)}",
                         _byte_offset(text, i),
                         expected=("number", "name", "operator", "parenthesis"))
    tokens.append(_Token("end", "", n))
    return tokens


def _byte_offset(text, char_index):
    return len(text[:char_index].encode("utf-8"))


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected):
        tok = self.peek()
        offset = _byte_offset(self.text, tok.offset)
        shown = tok.text or "end of input"
        raise ParseError(
            f"expected {' or '.join(expected)}, found {shown!r} at offset {offset}",
            offset, expected=expected)

    def parse(self):
        e = self.expr()
        if self.peek().kind != "end":
            self.fail(("'+'", "'-'", "'*'", "'/'", "'^'", "end of input"))
        return e

    def expr(self):
        e = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self):
        e = self.factor()
        while self.peek().kind in ("*", "/"):
            op = self.advance().kind
            rhs = self.factor()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def factor(self):
        if self.peek().kind == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek().kind == "^":
            self.advance()
            return Pow(base, self.factor())
        return base

    def atom(self):
        tok = self.peek()
        if tok.kind == "number":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "name":
            self.advance()
            if self.peek().kind == "(":
                if tok.text not in FUNCTIONS:
                    offset = _byte_offset(self.text, tok.offset)
                    raise UnknownFunctionError(
                        f"unknown function {tok.text!r} at offset {offset}",
                        offset, expected=FUNCTIONS)
                self.advance()
                arg = self.expr()
                if self.peek().kind != ")":
                    self.fail(("')'",))
                self.advance()
                return Call(tok.text, arg)
            if tok.text in CONSTANTS:
                return Num(CONSTANTS[tok.text])
            return Sym(tok.text)
        if tok.kind == "(":
            self.advance()
            e = self.expr()
            if self.peek().kind != ")":
                self.fail(("')'",))
            self.advance()
            return e
        self.fail(("number", "name", "'('", "'-'"))


def parse(text):
    """Parse infix text into an Expression.

    Raises ParseError with a byte offset and expected-token set on syntax
    errors, UnknownFunctionError for names applied as functions that are
    not in the known set.
    """
    if not isinstance(text, str) or not text.strip():
        raise ParseError("empty expression", 0, expected=("number", "name", "'('", "'-'"))
    return _Parser(text).parse()
