"""Exact coefficient arithmetic on chart products.

A chart product of dimension n carries coordinates z1..zn (first factor)
and zeta1..zetan (second factor).  Values are sparse polynomials with
rational coefficients, optionally divided by declared linear forms
(controlled localization, e.g. 1/(z1 - zeta1) on off-diagonal charts).

Everything is exact.  Equality is canonical-form equality: no zero terms
are stored, denominator factors are monic with multiplicities, and common
factors between numerator and denominator are cancelled on construction.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Rat = Fraction

__all__ = [
    "Rat",
    "NotTPolynomial",
    "DiagonalPole",
    "CoeffFunction",
    "TPolynomial",
    "var_index",
    "var_name",
    "segment_substitute",
    "integrate_weighted",
    "restrict_diagonal",
]


class NotTPolynomial(ValueError):
    """Diagonal-segment substitution produced a t-dependent denominator."""


class DiagonalPole(ValueError):
    """A denominator factor vanishes identically on the diagonal z = zeta."""


def var_index(n: int, name: str) -> int:
    """Map a coordinate name ('z3' or 'zeta1') to its exponent slot."""
    if name.startswith("zeta"):
        i = int(name[4:])
        if not 1 <= i <= n:
            raise ValueError(f"unknown coordinate {name!r} in dimension {n}")
        return n + i - 1
    if name.startswith("z"):
        i = int(name[1:])
        if not 1 <= i <= n:
            raise ValueError(f"unknown coordinate {name!r} in dimension {n}")
        return i - 1
    raise ValueError(f"unknown coordinate {name!r}")


def var_name(n: int, idx: int) -> str:
    return f"z{idx + 1}" if idx < n else f"zeta{idx - n + 1}"


# A linear form is stored as a canonical key: terms sorted by descending
# exponent, leading coefficient 1.  Denominators are ((form_key, mult), ...).
_FormKey = tuple[tuple[tuple[int, ...], Rat], ...]
_Denom = tuple[tuple[_FormKey, int], ...]


def _canonical_linear(terms: Mapping[tuple[int, ...], Rat]) -> tuple[Rat, _FormKey]:
    """Scale a nonzero linear form so its lex-leading coefficient is 1."""
    items = [(e, c) for e, c in terms.items() if c]
    if not items:
        raise ZeroDivisionError("zero is not a valid denominator factor")
    if all(sum(e) == 0 for e, _ in items):
        raise ValueError("constant denominator factors must be folded into terms")
    if any(sum(e) > 1 for e, _ in items):
        raise ValueError("denominator factors must be linear forms")
    lead = max(e for e, _ in items)
    scale = dict(items)[lead]
    key = tuple(sorted(((e, c / scale) for e, c in items), reverse=True))
    return scale, key


def _divide_exact(
    num: Mapping[tuple[int, ...], Rat], form: _FormKey
) -> dict[tuple[int, ...], Rat] | None:
    """Exact division of a polynomial by a linear form; None if not divisible."""
    rem = dict(num)
    quot: dict[tuple[int, ...], Rat] = {}
    lead_e, lead_c = form[0]
    while rem:
        lt = max(rem)
        if not all(a >= b for a, b in zip(lt, lead_e)):
            return None
        qe = tuple(a - b for a, b in zip(lt, lead_e))
        qc = rem[lt] / lead_c
        quot[qe] = quot.get(qe, Rat(0)) + qc
        for fe, fc in form:
            ke = tuple(a + b for a, b in zip(qe, fe))
            c = rem.get(ke, Rat(0)) - qc * fc
            if c:
                rem[ke] = c
            else:
                rem.pop(ke, None)
    return quot


def _mul_terms(a, b):
    out: dict[tuple[int, ...], Rat] = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            c = out.get(e, Rat(0)) + ca * cb
            if c:
                out[e] = c
            else:
                del out[e]
    return out


def _add_terms(a, b):
    out = dict(a)
    for e, c in b.items():
        s = out.get(e, Rat(0)) + c
        if s:
            out[e] = s
        else:
            out.pop(e, None)
    return out


class CoeffFunction:
    """A sparse rational polynomial in z1..zn, zeta1..zetan over a localization.

    Immutable after construction; the constructor reduces to canonical form
    (zero terms dropped, numerator/denominator common linear factors
    cancelled, monic denominator factors).
    """

    __slots__ = ("n", "terms", "denom", "_key")

    def __init__(
        self,
        n: int,
        terms: Mapping[tuple[int, ...], Rat] | None = None,
        denom: _Denom = (),
    ):
        if n < 1:
            raise ValueError("dimension must be >= 1")
        clean: dict[tuple[int, ...], Rat] = {}
        for e, c in (terms or {}).items():
            if len(e) != 2 * n:
                raise ValueError("exponent vectors must have length 2n")
            c = Rat(c)
            if c:
                clean[tuple(e)] = c
        red_denom: list[tuple[_FormKey, int]] = []
        if clean and denom:
            for key, mult in denom:
                while mult > 0:
                    q = _divide_exact(clean, key)
                    if q is None:
                        break
                    clean = q
                    mult -= 1
                if mult:
                    red_denom.append((key, mult))
        self.n = n
        self.terms = clean
        self.denom = tuple(sorted(red_denom)) if clean else ()
        self._key = (n, tuple(sorted(clean.items())), self.denom)

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "CoeffFunction":
        return cls(n)

    @classmethod
    def const(cls, n: int, c) -> "CoeffFunction":
        return cls(n, {(0,) * (2 * n): Rat(c)})

    @classmethod
    def one(cls, n: int) -> "CoeffFunction":
        return cls.const(n, 1)

    @classmethod
    def variable(cls, n: int, name: str) -> "CoeffFunction":
        e = [0] * (2 * n)
        e[var_index(n, name)] = 1
        return cls(n, {tuple(e): Rat(1)})

    @classmethod
    def monomial(cls, n: int, exps: Sequence[int], c=1) -> "CoeffFunction":
        return cls(n, {tuple(exps): Rat(c)})

    def localized(self, form: "CoeffFunction", power: int = 1) -> "CoeffFunction":
        """Divide by a linear form (declared multiplicative set element)."""
        if power < 0:
            raise ValueError("localization power must be >= 0")
        if form.denom:
            raise ValueError("denominator factor must itself be polynomial")
        if power == 0:
            return self
        scale, key = _canonical_linear(form.terms)
        num = {e: c / scale**power for e, c in self.terms.items()}
        denom = dict(self.denom)
        denom[key] = denom.get(key, 0) + power
        return CoeffFunction(self.n, num, tuple(sorted(denom.items())))

    # -- canonical form -----------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        return isinstance(other, CoeffFunction) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def total_degree(self) -> int:
        """Numerator total degree; -1 for zero."""
        return max((sum(e) for e in self.terms), default=-1)

    def is_polynomial(self) -> bool:
        return not self.denom

    def zeta_free(self) -> bool:
        return all(all(x == 0 for x in e[self.n:]) for e in self.terms) and all(
            all(x == 0 for x in e[self.n:] ) for key, _ in self.denom for e, _ in key
        )

    # -- arithmetic ----------------------------------------------------

    def _check(self, other: "CoeffFunction"):
        if self.n != other.n:
            raise ValueError("dimension mismatch")

    def __add__(self, other: "CoeffFunction") -> "CoeffFunction":
        self._check(other)
        if self.denom == other.denom:
            return CoeffFunction(self.n, _add_terms(self.terms, other.terms), self.denom)
        da, db = dict(self.denom), dict(other.denom)
        common = {k: max(da.get(k, 0), db.get(k, 0)) for k in {*da, *db}}
        ta, tb = dict(self.terms), dict(other.terms)
        for k, m in common.items():
            for _ in range(m - da.get(k, 0)):
                ta = _mul_terms(ta, dict(k))
            for _ in range(m - db.get(k, 0)):
                tb = _mul_terms(tb, dict(k))
        return CoeffFunction(self.n, _add_terms(ta, tb), tuple(sorted(common.items())))

    def __neg__(self) -> "CoeffFunction":
        return CoeffFunction(self.n, {e: -c for e, c in self.terms.items()}, self.denom)

    def __sub__(self, other: "CoeffFunction") -> "CoeffFunction":
        return self + (-other)

    def __mul__(self, other) -> "CoeffFunction":
        if isinstance(other, (int, Fraction)):
            return CoeffFunction(
                self.n, {e: c * other for e, c in self.terms.items()}, self.denom
            )
        self._check(other)
        denom = dict(self.denom)
        for k, m in other.denom:
            denom[k] = denom.get(k, 0) + m
        return CoeffFunction(
            self.n, _mul_terms(self.terms, other.terms), tuple(sorted(denom.items()))
        )

    __rmul__ = __mul__

    # -- calculus and substitution --------------------------------------

    def partial(self, var: str | int) -> "CoeffFunction":
        """Exact formal partial derivative with respect to one coordinate."""
        idx = var if isinstance(var, int) else var_index(self.n, var)
        num: dict[tuple[int, ...], Rat] = {}
        for e, c in self.terms.items():
            if e[idx]:
                e2 = list(e)
                e2[idx] -= 1
                e2 = tuple(e2)
                s = num.get(e2, Rat(0)) + c * e[idx]
                if s:
                    num[e2] = s
                else:
                    num.pop(e2, None)
        if not self.denom:
            return CoeffFunction(self.n, num)
        # quotient rule against the product of linear factors
        forms = [(dict(key), mult) for key, mult in self.denom]
        prod_all = {(0,) * (2 * self.n): Rat(1)}
        for f, _ in forms:
            prod_all = _mul_terms(prod_all, f)
        total = _mul_terms(num, prod_all)
        for i, (f, mult) in enumerate(forms):
            dcoef = f.get(
                tuple(1 if j == idx else 0 for j in range(2 * self.n)), Rat(0)
            )
            if not dcoef:
                continue
            rest = {(0,) * (2 * self.n): Rat(-mult * dcoef)}
            for j, (g, _) in enumerate(forms):
                if j != i:
                    rest = _mul_terms(rest, g)
            total = _add_terms(total, _mul_terms(self.terms, rest))
        denom = tuple(sorted((key, mult + 1) for key, mult in self.denom))
        return CoeffFunction(self.n, total, denom)

    def substitute(self, zmaps: Sequence["CoeffFunction"]) -> "CoeffFunction":
        """Apply a polynomial coordinate change z_i -> zmaps[i] to both blocks.

        Each map must be a z-block-only polynomial in the target coordinates;
        the zeta block receives the same map with shifted variables.
        Denominator factors must remain linear after substitution.
        """
        n = self.n
        if len(zmaps) != n:
            raise ValueError("need one substitution per coordinate")
        for m in zmaps:
            if m.n != n or m.denom or not m.zeta_free():
                raise ValueError("substitutions must be z-block polynomials")
        reps = [dict(m.terms) for m in zmaps]
        reps += [
            {tuple(e[n:] + e[:n]): c for e, c in m.terms.items()} for m in zmaps
        ]
        cache: dict[tuple[int, int], dict] = {}

        def power(i: int, k: int) -> dict:
            if k == 0:
                return {(0,) * (2 * n): Rat(1)}
            got = cache.get((i, k))
            if got is None:
                got = _mul_terms(power(i, k - 1), reps[i])
                cache[(i, k)] = got
            return got

        out: dict[tuple[int, ...], Rat] = {}
        for e, c in self.terms.items():
            acc = {(0,) * (2 * n): c}
            for i, k in enumerate(e):
                if k:
                    acc = _mul_terms(acc, power(i, k))
            out = _add_terms(out, acc)
        denom: dict[_FormKey, int] = {}
        scale = Rat(1)
        for key, mult in self.denom:
            sub: dict[tuple[int, ...], Rat] = {}
            for e, c in key:
                acc = {(0,) * (2 * n): c}
                for i, k in enumerate(e):
                    if k:
                        acc = _mul_terms(acc, power(i, k))
                sub = _add_terms(sub, acc)
            if max((sum(e) for e in sub), default=0) > 1:
                raise ValueError("substitution breaks linearity of a denominator")
            s, k2 = _canonical_linear(sub)
            scale /= s**mult
            denom[k2] = denom.get(k2, 0) + mult
        if scale != 1:
            out = {e: c * scale for e, c in out.items()}
        return CoeffFunction(n, out, tuple(sorted(denom.items())))

    def zeta_shift(self) -> "CoeffFunction":
        """Move a z-block polynomial onto the zeta block (f(z) -> f(zeta))."""
        if not self.zeta_free() or self.denom:
            raise ValueError("zeta_shift needs a z-block polynomial")
        n = self.n
        return CoeffFunction(
            n, {tuple(e[n:] + e[:n]): c for e, c in self.terms.items()}
        )

    # -- serialization ---------------------------------------------------

    def to_text(self) -> str:
        if not self.terms:
            return "0"

        def mono(e, c):
            factors = []
            if abs(c) != 1 or not any(e):
                factors.append(str(abs(c)))
            for i, k in enumerate(e):
                if k == 1:
                    factors.append(var_name(self.n, i))
                elif k > 1:
                    factors.append(f"{var_name(self.n, i)}^{k}")
            return " * ".join(factors)

        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            op = "-" if c < 0 else "+"
            parts.append((op, mono(e, c)))
        head_op, head = parts[0]
        text = ("-" if head_op == "-" else "") + head
        for op, m in parts[1:]:
            text += f" {op} {m}"
        if self.denom:
            dens = []
            for key, mult in self.denom:
                ftext = CoeffFunction(self.n, dict(key)).to_text()
                dens.append(f"({ftext})^{mult}" if mult > 1 else f"({ftext})")
            text = f"({text}) / " + " / ".join(dens)
        return text

    @classmethod
    def from_text(cls, n: int, text: str) -> "CoeffFunction":
        text = text.strip()
        num_text, denoms = _split_denominators(text)
        out = cls(n, _parse_poly_terms(n, num_text))
        for ftext, power in denoms:
            form = cls(n, _parse_poly_terms(n, ftext))
            out = out.localized(form, power)
        return out

    def __repr__(self) -> str:
        return f"CoeffFunction({self.n}, {self.to_text()!r})"


def _split_denominators(text: str) -> tuple[str, list[tuple[str, int]]]:
    depth = 0
    cuts = [-1]
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "/" and depth == 0 and _is_factor_slash(text, i):
            cuts.append(i)
    chunks = [text[a + 1: b].strip() for a, b in zip(cuts, cuts[1:] + [len(text)])]
    num = chunks[0]
    if num.startswith("(") and num.endswith(")") and len(chunks) > 1:
        num = num[1:-1]
    dens = []
    for chunk in chunks[1:]:
        power = 1
        if "^" in chunk and chunk.rsplit("^", 1)[1].strip().isdigit():
            chunk, p = chunk.rsplit("^", 1)
            power = int(p)
        chunk = chunk.strip()
        if chunk.startswith("(") and chunk.endswith(")"):
            chunk = chunk[1:-1]
        dens.append((chunk, power))
    return num, dens


def _is_factor_slash(text: str, i: int) -> bool:
    # distinguish "f / (form)" from the rational "3/4"
    left = text[:i].rstrip()
    right = text[i + 1:].lstrip()
    return not (left and left[-1].isdigit() and right and right[0].isdigit())


def _parse_poly_terms(n: int, text: str) -> dict[tuple[int, ...], Rat]:
    text = text.strip()
    if not text or text == "0":
        return {}
    toks: list[tuple[str, str]] = []
    sign = "+"
    buf = ""
    depth = 0
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in "+-" and depth == 0 and (not buf.rstrip() or buf.rstrip()[-1] not in "*^/("):
            if buf.strip():
                toks.append((sign, buf.strip()))
            sign, buf = ch, ""
        else:
            buf += ch
    if buf.strip():
        toks.append((sign, buf.strip()))
    out: dict[tuple[int, ...], Rat] = {}
    for sgn, term in toks:
        c = Rat(-1 if sgn == "-" else 1)
        e = [0] * (2 * n)
        for raw in term.split("*"):
            f = raw.strip().strip("()")
            if not f:
                continue
            if f[0].isdigit() or f[0] in "+-" or "/" in f and f[0].isdigit():
                c *= Rat(f)
                continue
            if "^" in f:
                name, k = f.split("^")
                e[var_index(n, name.strip())] += int(k)
            else:
                e[var_index(n, f)] += 1
        key = tuple(e)
        s = out.get(key, Rat(0)) + c
        if s:
            out[key] = s
        else:
            out.pop(key, None)
    return out


class TPolynomial:
    """Polynomial in the auxiliary segment variable t with function coefficients."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: Iterable[CoeffFunction]):
        cs = list(coeffs)
        while cs and cs[-1].is_zero():
            cs.pop()
        self.n = n
        self.coeffs = tuple(cs)

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def evaluate(self, t) -> CoeffFunction:
        out = CoeffFunction.zero(self.n)
        tv = Rat(t)
        acc = Rat(1)
        for c in self.coeffs:
            out = out + c * acc
            acc *= tv
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TPolynomial)
            and self.n == other.n
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.n, self.coeffs))

    def __repr__(self):
        return f"TPolynomial({[c.to_text() for c in self.coeffs]})"


def segment_substitute(f: CoeffFunction) -> TPolynomial:
    """Replace each z_i by zeta_i + t(z_i - zeta_i), expanded in t.

    Raises NotTPolynomial when a denominator factor depends on the z block,
    since the substitution would then put t into the denominator (the
    analytic case this ring cannot represent).
    """
    n = f.n
    for key, _ in f.denom:
        if any(any(e[:n]) for e, _ in key):
            raise NotTPolynomial(
                "denominator becomes t-dependent under segment substitution"
            )
    zero = (0,) * (2 * n)

    def tmul(a: list[dict], b: list[dict]) -> list[dict]:
        out = [dict() for _ in range(len(a) + len(b) - 1)]
        for i, ta in enumerate(a):
            if not ta:
                continue
            for j, tb in enumerate(b):
                if tb:
                    out[i + j] = _add_terms(out[i + j], _mul_terms(ta, tb))
        return out

    cache: dict[tuple[int, int], list[dict]] = {}

    def zpow(i: int, k: int) -> list[dict]:
        if k == 0:
            return [{zero: Rat(1)}]
        got = cache.get((i, k))
        if got is None:
            ez = [0] * (2 * n)
            ez[i] = 1
            eze = [0] * (2 * n)
            eze[n + i] = 1
            base = [
                {tuple(eze): Rat(1)},
                {tuple(ez): Rat(1), tuple(eze): Rat(-1)},
            ]
            got = tmul(zpow(i, k - 1), base)
            cache[(i, k)] = got
        return got

    acc_t: list[dict] = [dict()]
    for e, c in f.terms.items():
        term_t: list[dict] = [{zero: c}]
        for i in range(n):
            if e[i]:
                term_t = tmul(term_t, zpow(i, e[i]))
        zeta_e = tuple([0] * n + list(e[n:]))
        if any(zeta_e):
            term_t = tmul(term_t, [{zeta_e: Rat(1)}])
        if len(term_t) > len(acc_t):
            acc_t += [dict() for _ in range(len(term_t) - len(acc_t))]
        for j, tt in enumerate(term_t):
            acc_t[j] = _add_terms(acc_t[j], tt)
    return TPolynomial(n, [CoeffFunction(n, tt, f.denom) for tt in acc_t])


def integrate_weighted(p: TPolynomial, k: int) -> CoeffFunction:
    """Exact value of the weighted segment integral with weight t^k."""
    if k < 0:
        raise ValueError("weight must be >= 0")
    out = CoeffFunction.zero(p.n)
    for m, c in enumerate(p.coeffs):
        out = out + c * Rat(1, k + m + 1)
    return out


def restrict_diagonal(f: CoeffFunction, block: str = "z") -> CoeffFunction:
    """Identify z and zeta; raises DiagonalPole on vanishing denominators.

    block="z" lands in the z-block (zeta_i -> z_i), the parameterization
    used for forms and polyvectors; block="zeta" lands in the zeta-block
    (z_i -> zeta_i), the projection appearing in the homotopy identities.
    """
    n = f.n

    if block == "z":
        def merge(e):
            return tuple(a + b for a, b in zip(e[:n], e[n:])) + (0,) * n
    elif block == "zeta":
        def merge(e):
            return (0,) * n + tuple(a + b for a, b in zip(e[:n], e[n:]))
    else:
        raise ValueError("block must be 'z' or 'zeta'")

    denom: dict[_FormKey, int] = {}
    scale = Rat(1)
    for key, mult in f.denom:
        restricted: dict[tuple[int, ...], Rat] = {}
        for e, c in key:
            e2 = merge(e)
            s = restricted.get(e2, Rat(0)) + c
            if s:
                restricted[e2] = s
            else:
                restricted.pop(e2, None)
        if not restricted:
            raise DiagonalPole("denominator vanishes on the diagonal")
        if any(sum(e) for e in restricted):
            s, k2 = _canonical_linear(restricted)
        else:
            s, k2 = restricted[(0,) * (2 * n)], None
        scale /= s**mult
        if k2 is not None:
            denom[k2] = denom.get(k2, 0) + mult
    out: dict[tuple[int, ...], Rat] = {}
    for e, c in f.terms.items():
        e2 = merge(e)
        s = out.get(e2, Rat(0)) + c * scale
        if s:
            out[e2] = s
        else:
            out.pop(e2, None)
    return CoeffFunction(n, out, tuple(sorted(denom.items())))
