"""Batch/REPL front end: a small expression language over the library.

Statements end with ';':

    basis(x, exp(x));                  declare the transbasis (default: x)
    let name = expr;                   bind an element or differential polynomial
    let name = dsolve(expr);           adjoin the distinguished solution
    expand(expr, n);                   print the series to order n
    zerotest(expr, ...);               decide simultaneous vanishing
    exp(expr);  log(expr);             compute (extending the tower if needed)

Expressions use exact rational literals, the variable x, bound names, the
differential indeterminate F with primes (F', F'') or d(F), the operators
+ - * / ^ (rational exponents), and the functions exp, log, d (delta_1) and
D(e, k) (delta_k).  '#' starts a comment.

Flags: --script FILE (batch; default reads stdin), --order N (default 5),
--trace, --raw, --assert-zero.  Output goes to stdout, diagnostics to
stderr; exit code 0 on success, 1 on diagnostics, 2 when --assert-zero saw
a failed zerotest.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .diffpoly import DiffPolynomial
from .errors import NotQuasiLinear, TransseriesError
from .field_tower import BaseElement, render_element
from .lazy_series import normalize
from .order_core import as_scalar
from .transbasis import Transbasis, exp_element, log_element, validate
from .zerotest import Trace, rebase_tower, zero_test


class CliError(TransseriesError):
    def __init__(self, message, pos=None):
        self.pos = pos
        super().__init__(message)


# -- tokenizer -----------------------------------------------------------------

SYMBOLS = ("+", "-", "*", "/", "^", "(", ")", ",", ";", "=", "'")


def tokenize(text):
    toks = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        start = (line, col)
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            toks.append(("num", text[i:j], start))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("name", text[i:j], start))
            col += j - i
            i = j
            continue
        if ch in SYMBOLS:
            toks.append((ch, ch, start))
            i += 1
            col += 1
            continue
        raise CliError(f"unexpected character {ch!r}", start)
    toks.append(("end", "", (line, col)))
    return toks


# -- parser ----------------------------------------------------------------------
# AST: ("num", Fraction) ("name", s) ("F", j) ("neg", a)
#      ("bin", op, a, b) ("call", fname, [args])


class Parser:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind):
        t = self.next()
        if t[0] != kind:
            raise CliError(f"expected {kind!r}, found {t[1]!r}", t[2])
        return t

    def at_end(self):
        return self.peek()[0] == "end"

    # statements ---------------------------------------------------------------

    def parse_script(self):
        stmts = []
        while not self.at_end():
            stmts.append(self.parse_statement())
        return stmts

    def parse_statement(self):
        t = self.peek()
        if t[0] != "name":
            raise CliError(f"statement expected, found {t[1]!r}", t[2])
        word = t[1]
        if word == "basis":
            self.next()
            self.expect("(")
            entries = [self.parse_expr()]
            while self.peek()[0] == ",":
                self.next()
                entries.append(self.parse_expr())
            self.expect(")")
            self.expect(";")
            return ("basis", entries, t[2])
        if word == "let":
            self.next()
            name = self.expect("name")[1]
            self.expect("=")
            nxt = self.peek()
            if nxt[0] == "name" and nxt[1] == "dsolve":
                self.next()
                self.expect("(")
                expr = self.parse_expr()
                self.expect(")")
                self.expect(";")
                return ("dsolve", name, expr, t[2])
            expr = self.parse_expr()
            self.expect(";")
            return ("let", name, expr, t[2])
        if word in ("expand", "zerotest", "exp", "log"):
            self.next()
            self.expect("(")
            args = [self.parse_expr()]
            while self.peek()[0] == ",":
                self.next()
                args.append(self.parse_expr())
            self.expect(")")
            self.expect(";")
            return ("query", word, args, t[2])
        raise CliError(f"unknown statement {word!r}", t[2])

    # expressions ----------------------------------------------------------------

    def parse_expr(self):
        node = self.parse_term()
        while self.peek()[0] in ("+", "-"):
            op = self.next()[0]
            rhs = self.parse_term()
            node = ("bin", op, node, rhs)
        return node

    def parse_term(self):
        node = self.parse_unary()
        while self.peek()[0] in ("*", "/"):
            op = self.next()[0]
            rhs = self.parse_unary()
            node = ("bin", op, node, rhs)
        return node

    def parse_unary(self):
        if self.peek()[0] == "-":
            self.next()
            return ("neg", self.parse_unary())
        if self.peek()[0] == "+":
            self.next()
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self):
        base = self.parse_atom()
        if self.peek()[0] == "^":
            self.next()
            exponent = self.parse_unary()
            return ("bin", "^", base, exponent)
        return base

    def parse_atom(self):
        t = self.next()
        if t[0] == "num":
            return ("num", Fraction(t[1]))
        if t[0] == "(":
            node = self.parse_expr()
            self.expect(")")
            return node
        if t[0] == "name":
            name = t[1]
            if name == "F":
                j = 0
                while self.peek()[0] == "'":
                    self.next()
                    j += 1
                return ("F", j)
            if self.peek()[0] == "(":
                self.next()
                args = [self.parse_expr()]
                while self.peek()[0] == ",":
                    self.next()
                    args.append(self.parse_expr())
                self.expect(")")
                return ("call", name, args)
            return ("name", name)
        raise CliError(f"unexpected token {t[1]!r}", t[2])


def parse(text):
    """Parse a script into statements; raises CliError with a position."""
    return Parser(tokenize(text)).parse_script()


# -- evaluation --------------------------------------------------------------------


class Session:
    """Evaluation state: the tower, the bindings, and the output sink."""

    def __init__(self, order=5, trace=False, raw=False, out=sys.stdout):
        self.basis = None
        self.node = None
        self.bindings = {}
        self.order = order
        self.trace = trace
        self.raw = raw
        self.out = out
        self.failed_zerotest = False

    def ensure_basis(self):
        if self.node is None:
            self.basis = Transbasis.initial(0)
            self.node = self.basis.top_node()

    # -- statements ---------------------------------------------------------------

    def run_statement(self, stmt):
        kind = stmt[0]
        if kind == "basis":
            self._stmt_basis(stmt[1])
        elif kind == "let":
            self._stmt_let(stmt[1], stmt[2])
        elif kind == "dsolve":
            self._stmt_dsolve(stmt[1], stmt[2])
        elif kind == "query":
            self._stmt_query(stmt[1], stmt[2])
        else:
            raise CliError(f"bad statement kind {kind!r}")

    def _stmt_basis(self, entries):
        if self.node is not None:
            raise CliError("basis already declared")
        specs = []
        for ast in entries:
            specs.append(_basis_descriptor(ast))
        self.basis = validate(specs)
        self.node = self.basis.top_node()

    def _stmt_let(self, name, expr):
        self.ensure_basis()
        if name in self.bindings:
            raise CliError(f"name {name!r} is already bound")
        self.bindings[name] = self.eval(expr)

    def _stmt_dsolve(self, name, expr):
        self.ensure_basis()
        if name in self.bindings:
            raise CliError(f"name {name!r} is already bound")
        value = self.eval(expr)
        if not isinstance(value, DiffPolynomial):
            raise CliError("dsolve needs a differential polynomial in F")
        from .diffpoly import dsolve_with_log_retries
        from .zerotest import extend_with_solution

        try:
            sol, solved, mappers = dsolve_with_log_retries(value)
        except NotQuasiLinear as exc:
            triple = exc.triple
            if triple:
                raise CliError(
                    "dsolve: not quasi-linear: "
                    f"v(P) = {triple[0]}, v(P_[1]) = {triple[1]}, v(P_[0]) = {triple[2]}"
                )
            raise CliError(f"dsolve: {exc}")
        for bmap in mappers:
            self._rebase_env(bmap)
        new_node = extend_with_solution(solved.node, solved, sol, name=name)
        self.node = new_node
        self.bindings[name] = new_node.generator()

    def _stmt_query(self, word, args):
        self.ensure_basis()
        if word == "expand":
            if len(args) != 2:
                raise CliError("expand takes (expr, order)")
            order = _const_value(args[1])
            value = self.eval(args[0])
            label = args[0][1] if args[0][0] == "name" else None
            text = self.render_value(value, order)
            self.out.write((f"{label} = {text}" if label else text) + "\n")
        elif word == "zerotest":
            self._query_zerotest(args)
        elif word in ("exp", "log"):
            if len(args) != 1:
                raise CliError(f"{word} takes one argument")
            value = self.eval(args[0])
            if isinstance(value, DiffPolynomial):
                raise CliError(f"{word} of a differential polynomial")
            fn = exp_element if word == "exp" else log_element
            value = self._to_top(value)
            result, node, mappers = fn(value, self.node)
            for bmap in mappers:
                self._rebase_env(bmap)
            if _depth(node) > _depth(self.node):
                self.node = node
            text = self.render_value(result, self.order)
            self.out.write(text + "\n")

    def _query_zerotest(self, args):
        values = [self.eval(a) for a in args]
        polys = []
        top = self.node
        for v in values:
            if isinstance(v, DiffPolynomial):
                raise CliError("zerotest takes field expressions, not F-polynomials")
        if not isinstance(top, _DsolType()):
            # no extension: decide syntactically in the base field
            ok = all(self.node.zero_test(self.node.lift(v) if v.node is not self.node else v)
                     for v in values)
            self.out.write(f"zerotest: {'true' if ok else 'false'}\n")
            if not ok:
                self.failed_zerotest = True
            return
        for v in values:
            lifted = top.lift(v) if v.node is not top else v
            num = lifted.num.prune()
            if not num.is_zero:
                polys.append(num)
        trace = Trace()
        if not polys:
            ok = True
        else:
            ok = zero_test(top.context(), polys, trace)
        if self.trace:
            self.out.write(trace.render() + "\n")
        info = _zerotest_info(trace, top)
        self.out.write(f"zerotest: {'true' if ok else 'false'}{info}\n")
        if not ok:
            self.failed_zerotest = True

    # -- expression evaluation ------------------------------------------------------

    def eval(self, ast):
        kind = ast[0]
        if kind == "num":
            return self.node.from_scalar(ast[1])
        if kind == "name":
            name = ast[1]
            if name == "x":
                return self._element_x()
            if name in self.bindings:
                return self.bindings[name]
            raise CliError(f"unknown name {name!r}")
        if kind == "F":
            mi = tuple([0] * ast[1] + [1])
            return DiffPolynomial(self.node, {mi: 1})
        if kind == "neg":
            return -self.eval(ast[1])
        if kind == "call":
            return self._eval_call(ast[1], ast[2])
        if kind == "bin":
            op, lhs, rhs = ast[1], ast[2], ast[3]
            if op == "^":
                base = self.eval(lhs)
                power = _const_fraction(rhs)
                return self._power(base, power)
            a = self.eval(lhs)
            b = self.eval(rhs)
            if op == "/":
                if isinstance(b, DiffPolynomial):
                    raise CliError("division by a differential polynomial")
                if isinstance(a, DiffPolynomial):
                    return a * b.inverse()
                return a / b
            a, b = self._align(a, b)
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            raise CliError(f"unknown operator {op!r}")
        raise CliError(f"bad expression node {kind!r}")

    def _eval_call(self, fname, args):
        if fname == "d":
            if len(args) != 1:
                raise CliError("d takes one argument")
            v = self.eval(args[0])
            return v.total_derive() if isinstance(v, DiffPolynomial) else v.derive()
        if fname == "D":
            if len(args) != 2:
                raise CliError("D takes (expr, k)")
            v = self.eval(args[0])
            k = int(_const_fraction(args[1]))
            if isinstance(v, DiffPolynomial):
                raise CliError("D applies to field expressions")
            return v.derive_k(k)
        if fname in ("exp", "log"):
            if len(args) != 1:
                raise CliError(f"{fname} takes one argument")
            v = self.eval(args[0])
            if isinstance(v, DiffPolynomial):
                raise CliError(f"{fname} of a differential polynomial")
            fn = exp_element if fname == "exp" else log_element
            v = self._to_top(v)
            result, node, mappers = fn(v, self.node)
            for bmap in mappers:
                self._rebase_env(bmap)
            if _depth(node) > _depth(self.node):
                self.node = node
            return result
        raise CliError(f"unknown function {fname!r}")

    def _power(self, base, power: Fraction):
        if isinstance(base, DiffPolynomial):
            if power.denominator != 1 or power < 0:
                raise CliError("polynomial powers must be natural numbers")
            return base ** int(power)
        if power.denominator == 1:
            return base ** int(power)
        # rational power of a monomial element
        if isinstance(base, BaseElement) and len(base.num) == 1 and len(base.den) == 1:
            (key, c), = base.num.items()
            if c == 1:
                return base.node.from_monomial(tuple(k * power for k in key))
        raise CliError("rational powers apply to monomials only")

    def _align(self, a, b):
        ap = isinstance(a, DiffPolynomial)
        bp = isinstance(b, DiffPolynomial)
        if ap and not bp:
            return a, DiffPolynomial(a.node, {(): self._join(a.node, b)})
        if bp and not ap:
            return DiffPolynomial(b.node, {(): self._join(b.node, a)}), b
        if ap and bp:
            if a.node is not b.node:
                deeper = a.node if _depth(a.node) >= _depth(b.node) else b.node
                a = DiffPolynomial(deeper, dict(a.terms), a.deriv_index)
                b = DiffPolynomial(deeper, dict(b.terms), b.deriv_index)
            return a, b
        return a, b

    def _join(self, node, b):
        return node.lift(b) if getattr(b, "node", None) is not node else b

    def _node_of(self, v):
        return v.node

    def _to_top(self, v):
        return v if v.node is self.node else self.node.lift(v)

    def _element_x(self):
        basis = self.node.basis
        for i, entry in enumerate(basis.entries):
            if entry.display == ("logpow", 0):
                vec = basis.unit_vec(i + 1, Fraction(-1))
                return self.node.lift(basis.node(i + 1).from_monomial(vec))
        raise CliError("x is not an element of the current basis")

    def _rebase_env(self, bmap):
        new = {}
        for name, v in self.bindings.items():
            if isinstance(v, BaseElement):
                new[name] = bmap.map_element(v)
            elif isinstance(v, DiffPolynomial):
                new[name] = v.rebase(bmap, rebase_tower(v.node, bmap))
            else:
                new[name] = v.rebase(bmap, rebase_tower(v.node, bmap))
        self.bindings = new
        self.node = rebase_tower(self.node, bmap)

    # -- rendering -------------------------------------------------------------------

    def render_value(self, value, order) -> str:
        if isinstance(value, DiffPolynomial):
            return repr(value)
        node = value.node
        n = node.level
        if n == 0:
            v = value.scalar_value()
            return str(v)
        stream = normalize(value.expand(n) if isinstance(value, BaseElement) else value.expand())
        order = as_scalar(order)
        parts = []
        for e, c in stream.terms_upto(order):
            if e >= order:
                break
            parts.append(self._render_term(node, n, e, c))
        tail = f"O({self._render_mono(node, n, order)})"
        if not parts:
            if stream.try_complete() and not stream._terms:
                return "0"
            return tail
        text = parts[0]
        for p in parts[1:]:
            text += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        if stream.try_complete() and all(t[0] < order for t in stream._terms):
            if len(parts) == 1 and text.startswith("(") and text.endswith(")"):
                inner = text[1:-1]
                if _balanced(inner):
                    return inner
            return text
        return f"{text} + {tail}"

    def _render_term(self, node, n, e, c) -> str:
        mono = self._render_mono(node, n, e) if e != 0 else ""
        ctext, plain = self._render_coeff(c)
        if e == 0:
            return ctext if plain else f"({ctext})"
        if plain and ctext == "1":
            return mono
        if plain and ctext == "-1":
            return f"-{mono}"
        if plain:
            return f"{ctext}*{mono}"
        return f"({ctext})*{mono}"

    def _render_coeff(self, c):
        if isinstance(c, Fraction):
            return str(c), True
        if not isinstance(c, BaseElement) and hasattr(c, "as_base"):
            base = c.as_base()
            if base is not None:
                c = base
        if isinstance(c, BaseElement):
            text = render_element(c)
            return text, "+" not in text and " - " not in text and "/(" not in text
        # genuinely extension-field coefficient: render as a sub-series
        return self.render_value(c, self.order), False

    def _render_mono(self, node, n, e) -> str:
        if self.raw:
            return f"b{n}^-({e})"
        return node.basis.entries[n - 1].render_power(-e)


def _balanced(text: str) -> bool:
    depth = 0
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                return False
    return depth == 0


def _DsolType():
    from .zerotest import DsolNode

    return DsolNode


def _depth(node):
    d = 0
    while hasattr(node, "parent"):
        d += 1
        node = node.parent
    return d


def _zerotest_info(trace: Trace, top) -> str:
    if trace.sigma is None:
        return ""
    n = top.level
    gen = top.name
    s = trace.sigma
    if trace.step6_pass:
        nxt = trace.step6_next
        comp = f"v{n}(Q({gen})) >= {nxt}" if nxt is not None else f"v{n}(Q({gen})) = +oo"
    else:
        comp = f"v{n}(Q({gen})) = {trace.step6_found} <= {trace.step6_bound}"
    return f" (sigma = {s}, {comp})"


def _basis_descriptor(ast):
    """Translate a basis-entry expression into a validate() descriptor."""
    depth = _log_depth(ast)
    if depth is not None:
        return ("log", depth)
    if ast[0] == "call" and ast[1] == "exp" and len(ast[2]) == 1:
        phi_ast = ast[2][0]
        return (
            "exp",
            lambda basis: _eval_basis_phi(phi_ast, basis),
            None,
            _render_ast(phi_ast),
        )
    if ast[0] == "bin" and ast[1] == "^":
        # b^e with symbolic exponent: rewrite as exp(e * log b)
        base_ast, exp_ast = ast[2], ast[3]
        phi_ast = ("bin", "*", exp_ast, ("call", "log", [base_ast]))
        return (
            "exp",
            lambda basis: _eval_basis_phi(phi_ast, basis),
            _render_ast(ast),
            _render_ast(phi_ast),
        )
    raise CliError("basis entries must be iterated logs of x or exponentials")


def _log_depth(ast):
    d = 0
    while ast[0] == "call" and ast[1] == "log" and len(ast[2]) == 1:
        d += 1
        ast = ast[2][0]
    if ast == ("name", "x"):
        return d
    return None


def _eval_basis_phi(ast, basis):
    """Evaluate a basis-entry logarithm over the prefix basis: numbers,
    iterated logs of x, + - * / and rational powers only."""
    node = basis.node(basis.size)

    def ev(a):
        kind = a[0]
        if kind == "num":
            return node.from_scalar(a[1])
        if kind == "neg":
            return -ev(a[1])
        depth = _log_depth(a)
        if depth is not None:
            for i, entry in enumerate(basis.entries):
                if entry.display == ("logpow", depth):
                    return node.from_monomial(basis.unit_vec(i + 1, Fraction(-1)))
            raise CliError(f"{_render_ast(a)} is not in the basis prefix")
        if kind == "bin":
            op = a[1]
            if op == "^":
                b = ev(a[2])
                p = _const_fraction(a[3])
                if p.denominator == 1:
                    return b ** int(p)
                if len(b.num) == 1 and len(b.den) == 1:
                    (key, c), = b.num.items()
                    if c == 1:
                        return node.from_monomial(tuple(k * p for k in key))
                raise CliError("rational powers apply to monomials only")
            l, r = ev(a[2]), ev(a[3])
            if op == "+":
                return l + r
            if op == "-":
                return l - r
            if op == "*":
                return l * r
            if op == "/":
                return l / r
        raise CliError(f"unsupported basis-entry expression {_render_ast(a)}")

    out = ev(ast)
    if len(out.den) != 1:
        raise CliError("basis-entry logarithm must be a finite monomial sum")
    return dict(out.num)


def _render_ast(ast, _ctx=0) -> str:
    """Precedence-aware rendering; re-parsing the result gives the same AST."""
    kind = ast[0]
    if kind == "num":
        text, prec = str(ast[1]), 5
    elif kind == "name":
        text, prec = ast[1], 5
    elif kind == "F":
        text, prec = "F" + "'" * ast[1], 5
    elif kind == "call":
        text = f"{ast[1]}({', '.join(_render_ast(a) for a in ast[2])})"
        prec = 5
    elif kind == "neg":
        text, prec = f"-{_render_ast(ast[1], 3)}", 1
    elif kind == "bin":
        op = ast[1]
        if op in ("+", "-"):
            text = f"{_render_ast(ast[2], 1)} {op} {_render_ast(ast[3], 2)}"
            prec = 1
        elif op in ("*", "/"):
            text = f"{_render_ast(ast[2], 2)}{op}{_render_ast(ast[3], 3)}"
            prec = 2
        else:  # ^
            text = f"{_render_ast(ast[2], 5)}^{_render_ast(ast[3], 4)}"
            prec = 4
    else:
        return repr(ast)
    return f"({text})" if prec < _ctx else text


def _const_fraction(ast) -> Fraction:
    if ast[0] == "num":
        return ast[1]
    if ast[0] == "neg":
        return -_const_fraction(ast[1])
    if ast[0] == "bin" and ast[1] == "/":
        return _const_fraction(ast[2]) / _const_fraction(ast[3])
    if ast[0] == "bin" and ast[1] == "-":
        return _const_fraction(ast[2]) - _const_fraction(ast[3])
    if ast[0] == "bin" and ast[1] == "+":
        return _const_fraction(ast[2]) + _const_fraction(ast[3])
    raise CliError("expected an exact rational constant")


def _const_value(ast) -> int:
    v = _const_fraction(ast)
    if v.denominator != 1 or v < 0:
        raise CliError("expected a natural number")
    return int(v)


# -- driver ---------------------------------------------------------------------------


def run_script(text, *, order=5, trace=False, raw=False, out=None, err=None):
    """Execute a script; returns the exit code per the CLI contract."""
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    session = Session(order=order, trace=trace, raw=raw, out=out)
    try:
        stmts = parse(text)
    except CliError as exc:
        pos = f" at line {exc.pos[0]}, column {exc.pos[1]}" if exc.pos else ""
        err.write(f"error{pos}: {exc}\n")
        return 1
    for stmt in stmts:
        try:
            session.run_statement(stmt)
        except (CliError, TransseriesError) as exc:
            loc = stmt[-1] if isinstance(stmt[-1], tuple) else None
            pos = f" at line {loc[0]}" if loc else ""
            err.write(f"error{pos}: {exc}\n")
            return 1
    return 2 if session.failed_zerotest else 0


def repl(order, trace, raw):
    """Read statements from stdin, executing at each ';'."""
    session = Session(order=order, trace=trace, raw=raw)
    buffer = ""
    interactive = sys.stdin.isatty()
    if interactive:
        sys.stderr.write("transseries repl; statements end with ';'\n")
    while True:
        if interactive:
            sys.stderr.write("> " if not buffer else ". ")
            sys.stderr.flush()
        line = sys.stdin.readline()
        if not line:
            break
        buffer += line
        while ";" in buffer:
            stmt_text, buffer = buffer.split(";", 1)
            stmt_text = stmt_text.strip()
            if not stmt_text:
                continue
            try:
                stmts = parse(stmt_text + ";")
                for stmt in stmts:
                    session.run_statement(stmt)
            except (CliError, TransseriesError) as exc:
                sys.stderr.write(f"error: {exc}\n")
                if not interactive:
                    return 1
    return 2 if session.failed_zerotest else 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="tscalc",
        description="exact transseries calculator: expansion, distinguished "
        "solutions and zero tests over a transbasis",
    )
    ap.add_argument("--script", metavar="FILE", help="batch script (default: stdin REPL)")
    ap.add_argument("--order", type=int, default=5, help="expansion order (default 5)")
    ap.add_argument("--trace", action="store_true", help="print zero-test step logs")
    ap.add_argument("--raw", action="store_true", help="render exponents as b-indexed powers")
    ap.add_argument(
        "--assert-zero",
        action="store_true",
        help="exit with status 2 when some zerotest is false",
    )
    args = ap.parse_args(argv)
    if args.script:
        try:
            with open(args.script, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            sys.stderr.write(f"error: {exc}\n")
            return 1
        code = run_script(text, order=args.order, trace=args.trace, raw=args.raw)
    else:
        code = repl(args.order, args.trace, args.raw)
    if code == 2 and not args.assert_zero:
        return 0
    return code


if __name__ == "__main__":
    sys.exit(main())
