"""Reading and writing algebra elements.

Two input forms are accepted:

* JSON, ``{"sum": [piece, ...]}`` where a piece is one of
  ``{"coef": [re, im], "term": {"u": .., "v": .., "tail": ..}}``,
  ``{"coef": .., "point": {"transient": .., "period": .., "k": n}}`` (an
  optional ``"target"`` point gives a non-isotropy arrow),
  ``{"coef": .., "gen": "t_u", "u": ..}`` or ``{"coef": .., "name": "one"}``.
* Text, e.g. ``t_0 * adjoint(t_0)``, ``2 v - Q(t_1)`` or ``vv*``.  Factors
  may be juxtaposed; a ``*`` that is not followed by an operand is the
  adjoint.

A term tail is ``"S"``, ``"F(w)"``, combinations with ``&``, ``|`` and a
leading ``~``, or ``{"atoms": [[q, ...], ...]}`` listing profile atoms.
"""

from __future__ import annotations

import json
import re
from typing import Any

from .cylinder_lattice import Region, atoms_of
from .errors import ExpressionError, GammalgError
from .shift_kernel import FollowerAutomaton, UPPoint
from .star_algebra import (
    Element,
    PointTerm,
    Term,
    adjoint,
    central_projection_pj,
    diag_expectation,
    element,
    endo_phi_hat,
    isometry_v,
    isotropy_expectation,
    linear_combination,
    mult_element_m,
    one,
    t,
)

# -- scalars, words, points -------------------------------------------------


def parse_coef(raw: Any) -> complex:
    if raw is None:
        return 1
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return raw
    if isinstance(raw, list) and len(raw) == 2 and all(isinstance(x, (int, float)) for x in raw):
        re_, im = raw
        return complex(re_, im) if im else re_
    if isinstance(raw, str):
        try:
            return complex(raw.replace("i", "j"))
        except ValueError:
            pass
    raise ExpressionError(f"bad coefficient {raw!r}")


def _word(aut: FollowerAutomaton, text: str):
    try:
        return aut.word(text)
    except GammalgError as exc:
        raise ExpressionError(str(exc)) from None


def parse_point(aut: FollowerAutomaton, text: str) -> UPPoint:
    """``"T,P"`` is the point ``T P P P ...``."""
    if text.count(",") != 1:
        raise ExpressionError(f"point {text!r} must be 'transient,period'")
    tr, per = text.split(",")
    per_w = _word(aut, per.strip())
    if not per_w:
        raise ExpressionError("period must be nonempty")
    return UPPoint(_word(aut, tr.strip()), per_w)


def parse_arrow(aut: FollowerAutomaton, text: str) -> tuple[UPPoint, int, UPPoint]:
    """``"T,P;k;T,P"``."""
    parts = text.split(";")
    if len(parts) != 3:
        raise ExpressionError(f"arrow {text!r} must be 'x;k;y'")
    try:
        k = int(parts[1])
    except ValueError:
        raise ExpressionError(f"bad arrow degree {parts[1]!r}") from None
    return parse_point(aut, parts[0]), k, parse_point(aut, parts[2])


def _point_json(aut: FollowerAutomaton, p: UPPoint) -> dict[str, str]:
    return {"transient": aut.render(p.transient), "period": aut.render(p.period)}


# -- tails ------------------------------------------------------------------

_TAIL_TOKEN = re.compile(r"\s*(F\([^)]*\)|S\b|empty\b|[&|~()])")


def parse_tail(aut: FollowerAutomaton, raw: Any) -> Region:
    if raw is None:
        return Region.whole(aut)
    if isinstance(raw, dict) and "atoms" in raw:
        known = atoms_of(aut).profile_set
        out = set()
        for atom in raw["atoms"]:
            p = frozenset(int(q) for q in atom)
            if p not in known:
                raise ExpressionError(f"{sorted(p)} is not a profile atom of this shift")
            out.add(p)
        return Region(aut, frozenset(out))
    if not isinstance(raw, str):
        raise ExpressionError(f"bad tail {raw!r}")
    tokens = []
    pos = 0
    text = raw.strip()
    while pos < len(text):
        m = _TAIL_TOKEN.match(text, pos)
        if not m:
            raise ExpressionError(f"cannot read tail {raw!r} at {pos}")
        tokens.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    it = iter(tokens + [None])
    cur = [next(it)]

    def advance():
        cur[0] = next(it)

    def union():
        r = inter()
        while cur[0] == "|":
            advance()
            r = r | inter()
        return r

    def inter():
        r = unary()
        while cur[0] == "&":
            advance()
            r = r & unary()
        return r

    def unary():
        tok = cur[0]
        if tok == "~":
            advance()
            return unary().complement()
        if tok == "(":
            advance()
            r = union()
            if cur[0] != ")":
                raise ExpressionError(f"unbalanced parentheses in tail {raw!r}")
            advance()
            return r
        if tok == "S":
            advance()
            return Region.whole(aut)
        if tok == "empty":
            advance()
            return Region.empty(aut)
        if tok and tok.startswith("F("):
            advance()
            return Region.follower(aut, _word(aut, tok[2:-1]))
        raise ExpressionError(f"unexpected {tok!r} in tail {raw!r}")

    r = union()
    if cur[0] is not None:
        raise ExpressionError(f"trailing {cur[0]!r} in tail {raw!r}")
    return r


# -- named elements ---------------------------------------------------------


def named(aut: FollowerAutomaton, name: str) -> Element:
    if name == "one":
        return one(aut)
    if name == "v":
        return isometry_v(aut)
    if name == "m":
        return mult_element_m(aut)
    if name.startswith("p_") and name[2:].isdigit():
        return central_projection_pj(aut, int(name[2:]))
    if name.startswith("t_"):
        return t(aut, _word(aut, name[2:]))
    raise ExpressionError(f"unknown name {name!r}")


FUNCTIONS = {
    "adjoint": adjoint,
    "P": diag_expectation,
    "Q": isotropy_expectation,
    "phi_hat": endo_phi_hat,
}


# -- JSON form --------------------------------------------------------------


def element_from_json(aut: FollowerAutomaton, data: Any) -> Element:
    if not isinstance(data, dict) or not isinstance(data.get("sum"), list):
        raise ExpressionError('element JSON must be {"sum": [...]}')
    pieces = []
    extra: list[tuple[complex, Element]] = []
    for item in data["sum"]:
        if not isinstance(item, dict):
            raise ExpressionError(f"bad piece {item!r}")
        c = parse_coef(item.get("coef"))
        if "term" in item:
            tm = item["term"]
            pieces.append((c, Term(_word(aut, tm.get("u", "")), _word(aut, tm.get("v", "")), parse_tail(aut, tm.get("tail")))))
        elif "point" in item:
            pt = item["point"]
            try:
                x = UPPoint(_word(aut, pt["transient"]), _word(aut, pt["period"]))
                y = None
                if "target" in pt:
                    y = UPPoint(_word(aut, pt["target"]["transient"]), _word(aut, pt["target"]["period"]))
                pieces.append((c, PointTerm(x, int(pt.get("k", 0)), y)))
            except (KeyError, TypeError, ValueError) as exc:
                raise ExpressionError(f"bad point piece: {exc}") from None
        elif "gen" in item:
            u = item.get("u", item["gen"][2:] if item["gen"].startswith("t_") else None)
            if u is None:
                raise ExpressionError(f"unknown generator {item['gen']!r}")
            extra.append((c, t(aut, _word(aut, u))))
        elif "name" in item:
            extra.append((c, named(aut, item["name"])))
        else:
            raise ExpressionError(f"piece {item!r} has no term, point, gen or name")
    base = element(aut, pieces)
    if not extra:
        return base
    return linear_combination(aut, [(1, base)] + extra)


def _coef_json(c: complex) -> list[float]:
    return [float(c.real), float(c.imag)]


def element_to_json(e: Element) -> dict[str, Any]:
    aut = e.aut
    out = []
    for (u, v, p), c in e.terms.items():
        out.append(
            {
                "coef": _coef_json(c),
                "term": {"u": aut.render(u), "v": aut.render(v), "tail": {"atoms": [sorted(p)]}},
            }
        )
    for (x, k, y), c in e.points.items():
        pt: dict[str, Any] = {**_point_json(aut, x), "k": k}
        if y != x:
            pt["target"] = _point_json(aut, y)
        out.append({"coef": _coef_json(c), "point": pt})
    return {"sum": out}


# -- text form --------------------------------------------------------------

_NUMBER = re.compile(r"(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)([ij])?")
_GENERATOR = re.compile(r"t_[^\s+\-*()]*")
_PROJECTION = re.compile(r"p_\d+")
_KEYWORDS = sorted(list(FUNCTIONS) + ["one", "v", "m"], key=len, reverse=True)


def _tokenize(text: str) -> list[tuple[str, Any]]:
    out: list[tuple[str, Any]] = []
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch in "+-*()":
            out.append(("op", ch))
            pos += 1
            continue
        m = _NUMBER.match(text, pos)
        if m:
            val = float(m.group(1))
            if val.is_integer() and "." not in m.group(1) and "e" not in m.group(1).lower():
                val = int(val)
            out.append(("num", complex(0, val) if m.group(2) else val))
            pos = m.end()
            continue
        if ch in "ij" and (pos + 1 == len(text) or not text[pos + 1].isalnum()):
            out.append(("num", 1j))
            pos += 1
            continue
        m = _GENERATOR.match(text, pos) or _PROJECTION.match(text, pos)
        if m:
            out.append(("name", m.group(0)))
            pos = m.end()
            continue
        for kw in _KEYWORDS:
            if text.startswith(kw, pos):
                out.append(("func" if kw in FUNCTIONS else "name", kw))
                pos += len(kw)
                break
        else:
            raise ExpressionError(f"unexpected {text[pos:pos + 10]!r} at position {pos}")
    return out


class _Parser:
    def __init__(self, aut: FollowerAutomaton, tokens):
        self.aut = aut
        self.tokens = tokens
        self.i = 0

    def peek(self, offset: int = 0):
        j = self.i + offset
        return self.tokens[j] if j < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def starts_operand(self, tok) -> bool:
        kind, val = tok
        return kind in ("num", "name", "func") or (kind == "op" and val == "(")

    def parse(self):
        val = self.sum()
        if self.peek()[0] is not None:
            raise ExpressionError(f"unexpected {self.peek()[1]!r}")
        return val

    def sum(self):
        val = self.product()
        while self.peek() in (("op", "+"), ("op", "-")):
            _, op = self.take()
            rhs = self.product()
            val = _combine(self.aut, val, rhs, op)
        return val

    def product(self):
        if self.peek() == ("op", "-"):
            self.take()
            return _scale(self.product(), -1)
        val = self.postfix()
        while True:
            tok = self.peek()
            if tok == ("op", "*") and self.starts_operand(self.peek(1)):
                self.take()
            elif not self.starts_operand(tok):
                break
            val = _mul(val, self.postfix())
        return val

    def postfix(self):
        val = self.atom()
        while self.peek() == ("op", "*") and not self.starts_operand(self.peek(1)):
            self.take()
            val = adjoint(val) if isinstance(val, Element) else complex(val).conjugate()
        return val

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return val
        if kind == "name":
            return named(self.aut, val)
        if kind == "func":
            if self.take() != ("op", "("):
                raise ExpressionError(f"{val} needs parentheses")
            arg = self.sum()
            if self.take() != ("op", ")"):
                raise ExpressionError("unbalanced parentheses")
            if not isinstance(arg, Element):
                raise ExpressionError(f"{val} needs an element argument")
            return FUNCTIONS[val](arg)
        if (kind, val) == ("op", "("):
            inner = self.sum()
            if self.take() != ("op", ")"):
                raise ExpressionError("unbalanced parentheses")
            return inner
        raise ExpressionError(f"unexpected {val!r}")


def _scale(x, c):
    return x * c


def _mul(a, b):
    if isinstance(a, Element) or isinstance(b, Element):
        if not isinstance(a, Element):
            return b * a
        return a * b
    return a * b


def _combine(aut, a, b, op):
    if not isinstance(a, Element):
        a = one(aut) * a
    if not isinstance(b, Element):
        b = one(aut) * b
    return a + b if op == "+" else a - b


def parse_text(aut: FollowerAutomaton, text: str) -> Element:
    tokens = _tokenize(text)
    if not tokens:
        raise ExpressionError("empty expression")
    val = _Parser(aut, tokens).parse()
    if not isinstance(val, Element):
        val = one(aut) * val
    return val


def parse_expression(aut: FollowerAutomaton, text: str) -> Element:
    """Parse either form; JSON is recognised by a leading ``{``."""
    stripped = text.strip()
    if stripped.startswith("{"):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ExpressionError(f"invalid JSON: {exc}") from None
        return element_from_json(aut, data)
    return parse_text(aut, stripped)
