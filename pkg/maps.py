"""Plane maps: expression trees, the text parser, degree of f_p and
orientation evidence."""

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from config.settings import settings
from curve import OrientedClosedCurve, contains
from errors import (CertificationFailed, InvalidLipschitzBound, MapSyntaxError, NotCounterclockwise,
                    NotInHull, NotSimple, OnCurve, OutsideWindow, ValueHit)
from geom import Window, as_point
from models import OrientationProfile, OrientationTrial, xy
from winding import lift_field

logger = structlog.get_logger()


# Expression nodes. Every node evaluates a complex ndarray elementwise.

class Node:
    def __call__(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Identity(Node):
    def __call__(self, z):
        return z

    def __str__(self):
        return "z"


@dataclass(frozen=True)
class Constant(Node):
    value: complex

    def __call__(self, z):
        return np.full_like(z, self.value, dtype=complex)

    def __str__(self):
        return _fmt(self.value)


@dataclass(frozen=True)
class Polynomial(Node):
    """Coefficients in ascending degree."""
    coefficients: Tuple[complex, ...]

    def __call__(self, z):
        return np.polyval(np.asarray(self.coefficients[::-1], dtype=complex), z)

    def __str__(self):
        return "poly[" + ",".join(_fmt(c) for c in self.coefficients) + "]"


@dataclass(frozen=True)
class Affine(Node):
    alpha: complex
    beta: complex

    def __call__(self, z):
        return self.alpha * z + self.beta

    def __str__(self):
        return f"affine[{_fmt(self.alpha)},{_fmt(self.beta)}]"


@dataclass(frozen=True)
class Translation(Node):
    beta: complex

    def __call__(self, z):
        return z + self.beta

    def __str__(self):
        return f"translate[{_fmt(self.beta)}]"


@dataclass(frozen=True)
class Unary(Node):
    """conj, re, im, abs, exp, fold or negation applied to an inner map."""
    op: str
    inner: Node

    def __call__(self, z):
        w = self.inner(z)
        if self.op == "conj":
            return np.conj(w)
        if self.op == "re":
            return np.real(w).astype(complex)
        if self.op == "im":
            return np.imag(w).astype(complex)
        if self.op == "abs":
            return np.abs(w).astype(complex)
        if self.op == "exp":
            return np.exp(w)
        if self.op == "fold":
            return np.abs(np.real(w)) + 1j * np.imag(w)
        if self.op == "neg":
            return -w
        raise ValueError(f"unknown unary op {self.op}")

    def __str__(self):
        if self.op == "neg":
            return f"-({self.inner})"
        return f"{self.op}({self.inner})"


@dataclass(frozen=True)
class Binary(Node):
    op: str
    left: Node
    right: Node

    def __call__(self, z):
        a, b = self.left(z), self.right(z)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            return a / b
        raise ValueError(f"unknown binary op {self.op}")

    def __str__(self):
        return f"({self.left}{self.op}{self.right})"


@dataclass(frozen=True)
class Power(Node):
    inner: Node
    exponent: int

    def __call__(self, z):
        return self.inner(z) ** self.exponent

    def __str__(self):
        return f"({self.inner})^{self.exponent}"


@dataclass(frozen=True)
class Compose(Node):
    """outer ∘ inner."""
    outer: Node
    inner: Node

    def __call__(self, z):
        return self.outer(self.inner(z))

    def __str__(self):
        return f"compose({self.outer},{self.inner})"


@dataclass(frozen=True)
class Custom(Node):
    fn: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"

    def __call__(self, z):
        return np.asarray(self.fn(z), dtype=complex)

    def __str__(self):
        return self.name


def _fmt(c: complex) -> str:
    c = complex(c)
    if c.imag == 0:
        return repr(c.real)
    if c.real == 0:
        return f"{c.imag!r}i"
    return f"({c.real!r}{c.imag:+}i)"


class PlaneMap:
    """A map of the plane, vectorized over complex arrays."""

    def __init__(self, node: Node, text: Optional[str] = None, lipschitz: Optional[float] = None,
                 window: Optional[Window] = None, validate: bool = True):
        self.node = node
        self.text = text if text is not None else str(node)
        self.lipschitz = lipschitz
        self.window = window
        if lipschitz is not None and validate:
            self.check_lipschitz()

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], np.ndarray], name: str = "custom",
                      lipschitz: Optional[float] = None) -> "PlaneMap":
        return cls(Custom(fn, name), name, lipschitz=lipschitz)

    def __call__(self, z: Any) -> Any:
        arr = np.asarray(z, dtype=complex)
        out = self.node(np.atleast_1d(arr))
        if arr.ndim == 0:
            return complex(out[0])
        return out.reshape(arr.shape)

    def evaluate(self, z: Any) -> complex:
        z = as_point(z)
        if self.window is not None and not self.window.contains(z):
            raise OutsideWindow(f"{z} is outside the map's window {self.window.to_json()}")
        return self(z)

    def compose(self, inner: "PlaneMap") -> "PlaneMap":
        """self ∘ inner."""
        lip = self.lipschitz * inner.lipschitz if self.lipschitz is not None and inner.lipschitz is not None else None
        return PlaneMap(Compose(self.node, inner.node), f"compose({self.text},{inner.text})", lip,
                        inner.window, validate=False)

    def iterate(self, n: int) -> "PlaneMap":
        result = self
        for _ in range(n - 1):
            result = self.compose(result)
        return result

    def check_lipschitz(self, pairs: int = 1000, seed: Optional[int] = None) -> float:
        """Largest sampled difference quotient; raises when it exceeds the bound."""
        window = self.window or Window(-2.0, -2.0, 2.0, 2.0)
        rng = np.random.default_rng(settings.seed if seed is None else seed)
        a = rng.uniform(window.xmin, window.xmax, pairs) + 1j * rng.uniform(window.ymin, window.ymax, pairs)
        # half the pairs are close together to catch local steepness
        step = 1e-3 * window.diameter * np.exp(2j * np.pi * rng.random(pairs // 2))
        b = np.concatenate([rng.uniform(window.xmin, window.xmax, pairs - pairs // 2)
                            + 1j * rng.uniform(window.ymin, window.ymax, pairs - pairs // 2),
                            a[:pairs // 2] + step])
        a = np.concatenate([a[pairs // 2:], a[:pairs // 2]])
        gap = np.abs(a - b)
        ok = gap > 0
        ratio = np.abs(self(a[ok]) - self(b[ok])) / gap[ok]
        worst = float(ratio.max()) if ratio.size else 0.0
        if worst > self.lipschitz * (1 + 1e-9):
            raise InvalidLipschitzBound(
                f"declared bound {self.lipschitz} but sampled quotient {worst:.6g} for {self.text}")
        return worst

    def __repr__(self) -> str:
        return f"PlaneMap({self.text!r})"


def homotopy(f0: PlaneMap, f1: PlaneMap, s: float) -> PlaneMap:
    """(1 - s) f0 + s f1."""
    node = Binary("+", Binary("*", Constant(1 - s), f0.node), Binary("*", Constant(s), f1.node))
    lip = None
    if f0.lipschitz is not None and f1.lipschitz is not None:
        lip = abs(1 - s) * f0.lipschitz + abs(s) * f1.lipschitz
    return PlaneMap(node, f"homotopy({f0.text},{f1.text},{s!r})", lip, f0.window, validate=False)


# Parser
#
#   expr    := term (('+' | '-') term)*
#   term    := factor (('*' | '/') factor)*
#   factor  := '-' factor | power
#   power   := atom ('^' INT)?
#   atom    := NUMBER ['i'] | 'z' | 'i' | '(' expr ')' | NAME ['(' expr (',' expr)* ')']
#              | NAME '[' expr (',' expr)* ']'
#
# Bare map names (conj, fold, re, im, abs, exp, id) stand for the map applied to z.

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|([A-Za-z_]+)|(\S))")
_UNARY = {"conj", "re", "im", "abs", "exp", "fold"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens: List[Tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                break
            if m.group(1) is not None:
                self.tokens.append(("num", m.group(1), m.start(1)))
            elif m.group(2) is not None:
                self.tokens.append(("name", m.group(2), m.start(2)))
            elif m.group(3) is not None:
                self.tokens.append(("op", m.group(3), m.start(3)))
            pos = m.end()
        self.k = 0

    def peek(self) -> Optional[Tuple[str, str, int]]:
        return self.tokens[self.k] if self.k < len(self.tokens) else None

    def column(self) -> int:
        tok = self.peek()
        return (tok[2] if tok else len(self.text)) + 1

    def take(self, value: Optional[str] = None) -> Tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise MapSyntaxError(f"expected {value or 'more input'}, got end of input", self.column())
        if value is not None and tok[1] != value:
            raise MapSyntaxError(f"expected {value!r}, got {tok[1]!r}", tok[2] + 1)
        self.k += 1
        return tok

    def at(self, value: str) -> bool:
        tok = self.peek()
        return tok is not None and tok[0] == "op" and tok[1] == value

    def parse(self) -> Node:
        if not self.tokens:
            raise MapSyntaxError("empty map expression", 1)
        node = self.expr()
        if self.peek() is not None:
            raise MapSyntaxError(f"unexpected {self.peek()[1]!r}", self.column())
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.at("+") or self.at("-"):
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.at("*") or self.at("/"):
            op = self.take()[1]
            node = Binary(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.at("-"):
            self.take()
            inner = self.factor()
            if isinstance(inner, Constant):
                return Constant(-inner.value)
            return Unary("neg", inner)
        return self.power()

    def power(self) -> Node:
        node = self.atom()
        if self.at("^"):
            self.take()
            tok = self.take()
            if tok[0] != "num" or not tok[1].isdigit():
                raise MapSyntaxError("exponent must be a non-negative integer", tok[2] + 1)
            node = Power(node, int(tok[1]))
        return node

    def args(self, close: str) -> List[Node]:
        items = [self.expr()]
        while self.at(","):
            self.take()
            items.append(self.expr())
        self.take(close)
        return items

    def constant(self, node: Node, col: int) -> complex:
        try:
            value = node(np.array([0.0, 1.0 + 1.0j]))
        except Exception:
            raise MapSyntaxError("coefficient is not a number", col) from None
        if value[0] != value[1]:
            raise MapSyntaxError("coefficient depends on z", col)
        return complex(value[0])

    def atom(self) -> Node:
        tok = self.peek()
        if tok is None:
            raise MapSyntaxError("unexpected end of input", self.column())
        kind, value, pos = tok
        if kind == "num":
            self.take()
            nxt = self.peek()
            if nxt is not None and nxt[0] == "name" and nxt[1] == "i" and nxt[2] == pos + len(value):
                self.take()
                return Constant(1j * float(value))
            return Constant(float(value))
        if kind == "op" and value == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        if kind != "name":
            raise MapSyntaxError(f"unexpected {value!r}", pos + 1)
        self.take()
        if value == "z" or value == "id":
            return Identity()
        if value == "i":
            return Constant(1j)
        if value in _UNARY:
            if self.at("("):
                self.take()
                inner = self.expr()
                self.take(")")
                return Unary(value, inner)
            return Unary(value, Identity())
        if value == "compose":
            self.take("(")
            items = self.args(")")
            if len(items) < 2:
                raise MapSyntaxError("compose needs at least two maps", pos + 1)
            node = items[-1]
            for outer in reversed(items[:-1]):
                node = Compose(outer, node)
            return node
        if value in ("poly", "affine", "translate", "const"):
            self.take("[")
            start = self.column()
            items = [self.constant(n, start) for n in self.args("]")]
            if value == "poly":
                return Polynomial(tuple(items))
            if value == "affine" and len(items) == 2:
                return Affine(items[0], items[1])
            if value in ("translate", "const") and len(items) == 1:
                return Translation(items[0]) if value == "translate" else Constant(items[0])
            raise MapSyntaxError(f"wrong number of coefficients for {value}", pos + 1)
        raise MapSyntaxError(f"unknown name {value!r}", pos + 1)


def parse_map(text: str, lipschitz: Optional[float] = None, window: Optional[Window] = None) -> PlaneMap:
    """Parse a map expression such as ``compose(poly[1,0,2], conj)``."""
    node = _Parser(text).parse()
    return PlaneMap(node, text, lipschitz=lipschitz, window=window)


# Degree and orientation

def degree_at(f: PlaneMap, S: OrientedClosedCurve, p: Any) -> int:
    """Degree of f_p(x) = (f(x) - f(p)) / |f(x) - f(p)| on S."""
    p = as_point(p)
    try:
        inside = contains(S, p)
    except OnCurve:
        raise ValueHit(f"point {p} lies on the curve, so f(p) is in f(S)") from None
    if not inside:
        raise NotInHull(f"point {p} is outside T(S)")
    fp = f(p)

    def field(t: np.ndarray) -> np.ndarray:
        return np.asarray(f(S.points(t)), dtype=complex) - fp

    def hit(t: float, norm: float) -> Exception:
        return ValueHit(f"|f(x) - f(p)| = {norm:.3e} at {S.points(t)}")

    L = getattr(f, "lipschitz", None)
    lift = lift_field(field, 0.0, 1.0, breakpoints=S.vertex_params, on_zero=hit,
                      lipschitz_rate=L * S.length if L is not None else None)
    total = lift.total
    rounded = int(round(total))
    if abs(total - rounded) >= 1e-6:
        raise CertificationFailed(f"degree {total:.9f} is not an integer")
    return rounded


def _trial_curve(window: Window, rng: np.random.Generator, polygon: bool) -> Tuple[OrientedClosedCurve, complex, float]:
    half = 0.5 * min(window.width, window.height)
    radius = rng.uniform(0.05, 0.45) * half
    lo = complex(window.xmin + 1.2 * radius, window.ymin + 1.2 * radius)
    hi = complex(window.xmax - 1.2 * radius, window.ymax - 1.2 * radius)
    center = complex(rng.uniform(lo.real, hi.real), rng.uniform(lo.imag, hi.imag))
    if polygon:
        n = int(rng.integers(5, 13))
        angles = 2 * np.pi * (np.arange(n) + rng.uniform(0.1, 0.9, n)) / n
        radii = radius * rng.uniform(0.7, 1.0, n)
        return OrientedClosedCurve(center + radii * np.exp(1j * angles)), center, radius
    return OrientedClosedCurve.circle(center, radius, 96), center, radius


def _run_trial(f: PlaneMap, window: Window, seed: int, k: int) -> OrientationTrial:
    rng = np.random.default_rng([seed, k])
    polygon = k % 2 == 1
    try:
        S, center, radius = _trial_curve(window, rng, polygon)
    except (NotSimple, NotCounterclockwise) as e:
        return OrientationTrial(shape="polygon", center=xy(window.center), radius=0.0,
                                point=xy(window.center), skipped=str(e))
    point = center + 0.2 * radius * rng.uniform(0, 1) * np.exp(2j * np.pi * rng.uniform())
    trial = dict(shape="polygon" if polygon else "circle", center=xy(center), radius=float(radius), point=xy(point))
    try:
        return OrientationTrial(degree=degree_at(f, S, point), **trial)
    except (ValueHit, NotInHull, CertificationFailed) as e:
        logger.debug("Orientation trial skipped", trial=k, reason=type(e).__name__)
        return OrientationTrial(skipped=f"{type(e).__name__}: {e}", **trial)


def orientation_class(f: PlaneMap, trials: int = 50, window: Optional[Window] = None,
                      seed: Optional[int] = None) -> OrientationProfile:
    """Sign profile of degree(f_p) over random simple curves."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    window = window or f.window or Window(-2.0, -2.0, 2.0, 2.0)
    seed = settings.seed if seed is None else seed
    with ThreadPoolExecutor(max_workers=settings.max_workers) as pool:
        results = list(pool.map(lambda k: _run_trial(f, window, seed, k), range(trials)))
    degrees = [r.degree for r in results if r.degree is not None]
    positive = sum(1 for d in degrees if d > 0)
    negative = sum(1 for d in degrees if d < 0)
    if positive and negative:
        label = "mixed"
    elif positive:
        label = "positive"
    elif negative:
        label = "negative"
    else:
        label = "inconclusive"
    profile = OrientationProfile(classification=label, positive=positive, negative=negative,
                                 zero=sum(1 for d in degrees if d == 0),
                                 inconclusive=len(results) - len(degrees), trials=results)
    logger.info("Orientation classified", map=f.text, classification=label, positive=positive,
                negative=negative, inconclusive=profile.inconclusive)
    return profile
