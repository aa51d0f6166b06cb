"""Seeded instance generators and the ``.psys.json`` system format.

"Random polynomial" means i.i.d. uniform coefficients on every monomial up
to the degree bound (only the top degree when homogeneous), drawn from
``random.Random(seed)`` in descending graded-lex monomial order.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from . import linalg
from .errors import InvalidRank, ParseError
from .field import DEFAULT_RATIONAL_BOUND, FieldCtx
from .linalg import Matrix
from .poly import MultiPoly, PolySystem, compose, monomials, monomials_upto, pack
from .polyspace import span


@dataclass(frozen=True)
class GenSpec:
    ctx: FieldCtx
    n: int
    u: int | None = None
    homogeneous: bool = False
    d_g: int = 2
    d_h: int = 2
    seed: int = 0
    coeff_bound: int = DEFAULT_RATIONAL_BOUND

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.u is not None and self.u < 1:
            raise ValueError("u must be >= 1")
        if self.d_g < 1 or self.d_h < 1:
            raise ValueError("degrees must be >= 1")
        if self.d_g * self.d_h > 4:
            raise ValueError(f"d_g*d_h = {self.d_g * self.d_h} exceeds 4")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def outputs(self) -> int:
        return self.n if self.u is None else self.u


def random_poly(ctx: FieldCtx, nvars: int, degree: int, rng: random.Random,
                homogeneous: bool = False, bound: int = DEFAULT_RATIONAL_BOUND) -> MultiPoly:
    keys = monomials(nvars, degree) if homogeneous else monomials_upto(nvars, degree)
    return MultiPoly(ctx, nvars, _sample_terms(ctx, keys, rng, bound), _trusted=True)


def _sample_terms(ctx, keys, rng, bound):
    out = {}
    for k in keys:
        v = ctx.sample(rng, bound)
        if v:
            out[k] = v
    return out


def random_system(ctx, nvars, count, degree, rng, homogeneous=False, bound=DEFAULT_RATIONAL_BOUND) -> PolySystem:
    return PolySystem(ctx, nvars, [random_poly(ctx, nvars, degree, rng, homogeneous, bound) for _ in range(count)])


def gen_decomposable(spec: GenSpec) -> tuple[PolySystem, PolySystem, PolySystem]:
    """Return ``(f, g, h)`` with ``f = g o h`` and uniformly random ``g``, ``h``."""
    rng = random.Random(spec.seed)
    ctx, n = spec.ctx, spec.n
    g = random_system(ctx, n, spec.outputs, spec.d_g, rng, spec.homogeneous, spec.coeff_bound)
    h = random_system(ctx, n, n, spec.d_h, rng, spec.homogeneous, spec.coeff_bound)
    return compose(g, h), g, h


def gen_rank_deficient(spec: GenSpec, k: int, basis: list[MultiPoly] | None = None):
    """Like :func:`gen_decomposable` but ``span(h)`` has dimension exactly ``k``.

    ``h`` starts with ``k`` random polynomials (or the given ``basis``); the
    remaining components are random linear combinations of them.
    """
    ctx, n = spec.ctx, spec.n
    if not 1 <= k < n:
        raise InvalidRank(f"k={k} must satisfy 1 <= k < n={n}")
    if basis is not None and len(basis) != k:
        raise InvalidRank(f"basis has {len(basis)} elements, expected {k}")
    rng = random.Random(spec.seed)
    g = random_system(ctx, n, spec.outputs, spec.d_g, rng, spec.homogeneous, spec.coeff_bound)
    while True:
        base = list(basis) if basis is not None else [
            random_poly(ctx, n, spec.d_h, rng, spec.homogeneous, spec.coeff_bound) for _ in range(k)
        ]
        rest = []
        for _ in range(n - k):
            comb = MultiPoly.zero(ctx, n)
            for b in base:
                comb = comb + b.scale(ctx.sample(rng, spec.coeff_bound))
            rest.append(comb)
        h = PolySystem(ctx, n, base + rest)
        if span(list(h)).dim == k:
            break
        if basis is not None:
            raise InvalidRank("given basis is linearly dependent")
    return compose(g, h), g, h


# -- 2R key material ---------------------------------------------------------------

@dataclass
class TwoRKey:
    r: Matrix
    s: Matrix
    t: Matrix
    psi: PolySystem
    phi: PolySystem
    public: PolySystem
    inner: PolySystem  # s o phi o r
    outer: PolySystem  # t o psi

    def evaluate_private(self, point) -> list:
        """Apply r, phi, s, psi, t in turn to ``point``."""
        x = _apply_matrix(self.r, point)
        x = [v.value for v in self.phi.evaluate(x)]
        x = _apply_matrix(self.s, x)
        x = [v.value for v in self.psi.evaluate(x)]
        return _apply_matrix(self.t, x)


def _apply_matrix(m: Matrix, point) -> list:
    ctx = m.ctx
    vals = [v.value if hasattr(v, "value") else ctx.reduce(v) for v in point]
    out = []
    for row in m.data:
        acc = ctx.zero
        for a, b in zip(row, vals):
            acc += (int(a) if ctx.is_prime else a) * b
        out.append(ctx.reduce(acc))
    return out


def linear_map(m: Matrix) -> PolySystem:
    """PolySystem ``x -> m @ x`` (component i is row i applied to x)."""
    ctx = m.ctx
    n = m.ncols
    polys = []
    for row in m.data:
        polys.append(MultiPoly(ctx, n, {tuple(int(i == j) for i in range(n)): (int(v) if ctx.is_prime else v)
                                        for j, v in enumerate(row) if v}))
    return PolySystem(ctx, n, polys)


def random_invertible(ctx: FieldCtx, n: int, rng: random.Random, bound=DEFAULT_RATIONAL_BOUND) -> Matrix:
    while True:
        m = Matrix.from_rows(ctx, [[ctx.sample(rng, bound) for _ in range(n)] for _ in range(n)])
        if linalg.rank(m) == n:
            return m


def gen_2r_keypair(ctx: FieldCtx, n: int, seed: int) -> TwoRKey:
    """2R-shaped key ``pi = t o psi o s o phi o r`` with random quadratic psi, phi."""
    if not ctx.is_prime:
        raise ValueError("2R keys are defined over prime fields")
    rng = random.Random(seed)
    r = random_invertible(ctx, n, rng)
    s = random_invertible(ctx, n, rng)
    t = random_invertible(ctx, n, rng)
    phi = random_system(ctx, n, n, 2, rng)
    psi = random_system(ctx, n, n, 2, rng)
    inner = compose(linear_map(s), compose(phi, linear_map(r)))
    outer = compose(linear_map(t), psi)
    public = compose(outer, inner)
    return TwoRKey(r, s, t, psi, phi, public, inner, outer)


# -- serialization -------------------------------------------------------------------

def serialize(sys: PolySystem) -> bytes:
    return json.dumps(sys.to_json(), separators=(",", ":")).encode()


def _parse_field(obj, where):
    try:
        return FieldCtx.parse(obj["field"])
    except KeyError:
        raise ParseError("missing 'field'", where) from None
    except (ValueError, AttributeError) as exc:
        raise ParseError(str(exc), f"{where}.field") from None


def _parse_nvars(obj, where):
    nv = obj.get("nvars")
    if not isinstance(nv, int) or isinstance(nv, bool) or not 0 <= nv <= 64:
        raise ParseError("'nvars' must be an integer in [0, 64]", f"{where}.nvars")
    return nv


def _parse_terms(ctx, nvars, terms, where) -> MultiPoly:
    if not isinstance(terms, list):
        raise ParseError("terms must be a list", where)
    out = {}
    for i, item in enumerate(terms):
        at = f"{where}[{i}]"
        if not (isinstance(item, list) and len(item) == 2):
            raise ParseError("term must be [exponents, coefficient]", at)
        exps, coef = item
        if not isinstance(exps, list) or len(exps) != nvars:
            raise ParseError(f"exponent vector must have {nvars} entries", at)
        if not all(isinstance(e, int) and not isinstance(e, bool) and 0 <= e <= 254 for e in exps):
            raise ParseError("exponents must be integers in [0, 254]", at)
        if not isinstance(coef, (str, int)) or isinstance(coef, bool):
            raise ParseError("coefficient must be a string", at)
        try:
            v = ctx.parse_value(coef)
        except ParseError as exc:
            raise ParseError(str(exc), at) from None
        key = pack(exps)
        if key in out:
            raise ParseError("duplicate monomial", at)
        if v:
            out[key] = v
    return MultiPoly(ctx, nvars, out, _trusted=True)


def parse(data: bytes | str) -> PolySystem:
    """Inverse of :func:`serialize`; raises :class:`ParseError` with a position."""
    if isinstance(data, bytes):
        try:
            data = data.decode()
        except UnicodeDecodeError as exc:
            raise ParseError("input is not UTF-8", exc.start) from None
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.pos) from None
    if not isinstance(obj, dict):
        raise ParseError("top level must be an object", "$")
    ctx = _parse_field(obj, "$")
    nvars = _parse_nvars(obj, "$")
    polys = obj.get("polys")
    if not isinstance(polys, list):
        raise ParseError("'polys' must be a list", "$.polys")
    return PolySystem(ctx, nvars, [_parse_terms(ctx, nvars, t, f"$.polys[{i}]") for i, t in enumerate(polys)])


def poly_from_json(obj: dict) -> MultiPoly:
    if not isinstance(obj, dict):
        raise ParseError("polynomial must be an object", "$")
    ctx = _parse_field(obj, "$")
    nvars = _parse_nvars(obj, "$")
    return _parse_terms(ctx, nvars, obj.get("terms"), "$.terms")


def load(path) -> PolySystem:
    with open(path, "rb") as fh:
        return parse(fh.read())


def dump(sys: PolySystem, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize(sys))
        fh.write(b"\n")
