"""Polynomial and rational-function algebra; exact transfer matrices; causality.

The transfer matrix of a reduced network is assembled symbolically in
the Laplace variable: the characteristic polynomial and the adjugate of
(sI - A_S) come from the Faddeev-LeVerrier recursion, so every entry is
an explicit numerator over the shared denominator.  Properness (the
degree gap between denominator and numerator) is then a robust integer,
which is the whole point: the inverted load relation turns out improper
whenever the output node holds a capacity.

Polynomials store ascending real coefficients.  Rational functions are
normalized so the denominator has constant term 1 (falling back to a
monic leading coefficient when the constant term vanishes).
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .errors import (
    DimensionTooLargeError,
    InsufficientOrderError,
    PoleAtZeroError,
    PoleEvaluationError,
    ZeroHvacPathError,
)
from .statespace import StateSpace

# leading coefficients at or below this fraction of the largest one are
# treated as zero when trimming (degree, hence properness, must not wobble
# on recursion residue)
TRIM_RTOL = 1e-9

# guard for the characteristic-polynomial recursion; beyond this the
# coefficient growth makes the recursion numerically meaningless
MAX_RESOLVENT_DIM = 50


class Polynomial:
    """Real polynomial with ascending coefficients; zero is stored as [0]."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        arr = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if arr.size == 0:
            arr = np.zeros(1)
        self.coeffs = _trim(arr)

    @property
    def degree(self) -> int:
        """Degree after trimming; -1 for the zero polynomial."""
        if self.is_zero:
            return -1
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0.0

    def __call__(self, s: complex) -> complex:
        acc = 0.0 + 0.0j
        for c in self.coeffs[::-1]:
            acc = acc * s + c
        return acc

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = a.copy()
        out[: len(b)] += b
        return Polynomial(out)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(np.convolve(self.coeffs, other.coeffs))
        return Polynomial(self.coeffs * float(other))

    __rmul__ = __mul__

    def __neg__(self) -> "Polynomial":
        return Polynomial(-self.coeffs)

    def __pow__(self, exponent: int) -> "Polynomial":
        out = Polynomial([1.0])
        for _ in range(exponent):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self) -> str:
        return f"Polynomial({self.coeffs.tolist()})"


def _trim(coeffs: np.ndarray) -> np.ndarray:
    scale = np.abs(coeffs).max()
    if scale == 0.0:
        return np.zeros(1)
    keep = len(coeffs)
    while keep > 1 and abs(coeffs[keep - 1]) <= TRIM_RTOL * scale:
        keep -= 1
    out = coeffs[:keep].copy()
    if keep == 1 and abs(out[0]) <= TRIM_RTOL * scale:
        out[0] = 0.0
    return out


def format_polynomial(p: Polynomial, var: str = "s") -> str:
    """Human-readable descending form, e.g. '1.448e+09·s^2 + 7.286e+05·s + 1'."""
    if p.is_zero:
        return "0"
    parts = []
    for power in range(p.degree, -1, -1):
        c = p.coeffs[power]
        if c == 0.0:
            continue
        mag = f"{abs(c):.6g}"
        if power == 0:
            term = mag
        elif power == 1:
            term = f"{mag}·{var}"
        else:
            term = f"{mag}·{var}^{power}"
        sign = "-" if c < 0 else "+"
        parts.append((sign, term))
    first_sign, first_term = parts[0]
    text = ("-" if first_sign == "-" else "") + first_term
    for sign, term in parts[1:]:
        text += f" {sign} {term}"
    return text


class PropernessClass(Enum):
    STRICTLY_PROPER = "strictly-proper"
    BIPROPER = "biproper"
    IMPROPER = "improper"


@dataclass(frozen=True)
class Properness:
    """Causality class plus the degree gap deg(den) - deg(num)."""

    category: PropernessClass
    relative_degree: int

    def __str__(self) -> str:
        return f"{self.category.value} (rel deg {self.relative_degree:+d})"


class RationalFunction:
    """Numerator/denominator pair in canonical normalization.

    The denominator is scaled to unit constant term whenever its
    constant term is nonzero, otherwise to unit leading coefficient;
    the numerator is scaled along.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den):
        num = num if isinstance(num, Polynomial) else Polynomial(num)
        den = den if isinstance(den, Polynomial) else Polynomial(den)
        if den.is_zero:
            raise ValueError("rational function with zero denominator")
        # stiff networks make den(0) legitimately tiny next to the leading
        # coefficient, so only an exact zero falls back to monic scaling
        den0 = den.coeffs[0]
        scale = 1.0 / den0 if den0 != 0.0 else 1.0 / den.coeffs[-1]
        self.num = num * scale
        self.den = den * scale

    def __call__(self, s: complex) -> complex:
        d = self.den(s)
        if abs(d) < 1e-300:
            raise PoleEvaluationError(f"evaluation at s = {s}: denominator vanishes")
        return self.num(s) / d

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(self.num * other.num, self.den * other.den)

    def __repr__(self) -> str:
        return f"({format_polynomial(self.num)}) / ({format_polynomial(self.den)})"


def evaluate(rf: RationalFunction, s: complex) -> complex:
    return rf(s)


def classify(rf: RationalFunction) -> Properness:
    """Properness from the trimmed degree gap.

    A zero numerator counts as degree -1, so an identically zero entry
    classifies as strictly proper.
    """
    rel = rf.den.degree - rf.num.degree
    if rel >= 1:
        cat = PropernessClass.STRICTLY_PROPER
    elif rel == 0:
        cat = PropernessClass.BIPROPER
    else:
        cat = PropernessClass.IMPROPER
    return Properness(cat, rel)


def dc_gain(rf: RationalFunction) -> float:
    # canonical normalization leaves den(0) at exactly 1 or exactly 0
    den0 = rf.den.coeffs[0]
    if den0 == 0.0:
        raise PoleAtZeroError("dc gain undefined: pole at s = 0")
    return float(rf.num.coeffs[0] / den0)


def _resolvent_exact(a: np.ndarray) -> tuple[list[list[list[Fraction]]], list[Fraction]]:
    """Faddeev-LeVerrier in exact rational arithmetic.

    Every double is an exact dyadic rational, so running the recursion
    over Fractions yields the exact adjugate and characteristic
    polynomial of the given matrix.  In floating point the recursion
    loses the trailing coefficients entirely once the eigenvalues span
    more than a few decades (they drown in the rounding noise of the
    leading ones), and thermal networks always span decades.

    Returns (mats_desc, char) where mats_desc[k] is the matrix
    coefficient of s^{n-1-k} in adj(sI - A) and char holds the monic
    characteristic coefficients, descending from s^n.
    """
    n = a.shape[0]
    zero = Fraction(0)
    exact = [[Fraction(x) for x in row] for row in a]
    m = [[Fraction(1) if i == j else zero for j in range(n)] for i in range(n)]
    mats_desc = []
    char = [Fraction(1)]
    for k in range(1, n + 1):
        mats_desc.append(m)
        am = [
            [sum((exact[i][l] * m[l][j] for l in range(n)), start=zero) for j in range(n)]
            for i in range(n)
        ]
        ck = -sum((am[i][i] for i in range(n)), start=zero) / k
        char.append(ck)
        if k < n:
            m = [
                [am[i][j] + (ck if i == j else zero) for j in range(n)]
                for i in range(n)
            ]
    return mats_desc, char


def resolvent(a: np.ndarray) -> tuple[list[np.ndarray], Polynomial]:
    """Adjugate of (sI - A) and the characteristic polynomial of A.

    Returns (matrices, d) where ``matrices[j]`` is the ascending
    coefficient of s^j in the adjugate, so that

        (sI - A) · sum_j matrices[j] s^j = d(s) · I

    holds as a polynomial identity.  Coefficients are computed exactly
    (see _resolvent_exact) and rounded once at the end; the dimension
    guard bounds the big-integer cost, which grows steeply with n.
    An empty A yields ([], d = 1).
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n > MAX_RESOLVENT_DIM:
        raise DimensionTooLargeError(
            f"state dimension {n} exceeds the recursion guard ({MAX_RESOLVENT_DIM})"
        )
    if n == 0:
        return [], Polynomial([1.0])
    mats_desc, char = _resolvent_exact(a)
    d = Polynomial([float(c) for c in char[::-1]])
    mats_asc = [np.array([[float(x) for x in row] for row in m]) for m in mats_desc[::-1]]
    return mats_asc, d


@dataclass(frozen=True)
class TransferMatrix:
    """One rational function per input channel, all over a shared denominator."""

    entries: tuple[RationalFunction, ...]
    input_labels: tuple[str, ...]
    input_names: tuple[tuple[str, ...], ...]
    output_label: str

    @property
    def denominator(self) -> Polynomial:
        return self.entries[0].den

    def find_channel(self, source_name: str) -> int:
        hits = [j for j, names in enumerate(self.input_names) if source_name in names]
        if not hits:
            raise KeyError(f"no input channel carries source {source_name!r}")
        return hits[0]


def transfer_matrix(ss: StateSpace) -> TransferMatrix:
    """Exact rational transfer matrix H(s) = C_S (sI - A_S)^-1 B_S + D_S.

    Numerators are assembled in the same exact arithmetic as the
    resolvent and the shared denominator is normalized to unit constant
    term before rounding, so every published coefficient is the
    correctly rounded exact value; structural zeros stay exactly zero.
    """
    n = ss.n_states
    if n > MAX_RESOLVENT_DIM:
        raise DimensionTooLargeError(
            f"state dimension {n} exceeds the recursion guard ({MAX_RESOLVENT_DIM})"
        )
    zero = Fraction(0)
    if n:
        mats_desc, char = _resolvent_exact(ss.a)
        c_exact = [Fraction(x) for x in ss.c]
        b_exact = [[Fraction(x) for x in row] for row in ss.b]
        # row vector c·N_k, then (c·N_k)·B, one polynomial coefficient per power
        cnb_desc = []
        for m in mats_desc:
            cm = [sum((c_exact[i] * m[i][j] for i in range(n)), start=zero) for j in range(n)]
            cnb_desc.append(
                [sum((cm[i] * b_exact[i][j] for i in range(n)), start=zero)
                 for j in range(ss.n_inputs)]
            )
    else:
        char = [Fraction(1)]
        cnb_desc = []
    d_exact = [Fraction(x) for x in ss.d]
    char_asc = char[::-1]
    cnb_asc = cnb_desc[::-1]
    scale = char_asc[0] if char_asc[0] != 0 else char_asc[-1]
    den = Polynomial([float(c / scale) for c in char_asc])
    entries = []
    for j in range(ss.n_inputs):
        num_asc = [d_exact[j] * c for c in char_asc]
        for power, row in enumerate(cnb_asc):
            num_asc[power] += row[j]
        num = Polynomial([float(c / scale) for c in num_asc])
        entries.append(RationalFunction(num, den))
    return TransferMatrix(
        entries=tuple(entries),
        input_labels=ss.input_labels,
        input_names=ss.input_names,
        output_label=ss.output_name,
    )


@dataclass(frozen=True)
class LoadTransferSet:
    """The inverted heat balance, solved for the power on one input channel.

    ``output_entry`` multiplies the prescribed output temperature (it is
    the reciprocal of the forward HVAC entry); each cross term multiplies
    one of the remaining inputs with a minus sign; sources sharing the
    HVAC channel's node slot pass straight through with gain -1.
    Because all forward entries share one denominator, every cross term
    reduces exactly to a ratio of numerators.
    """

    hvac_label: str
    output_entry: RationalFunction
    output_properness: Properness
    cross_terms: tuple[tuple[str, RationalFunction, Properness], ...]
    passthrough: tuple[tuple[str, float], ...]


def load_transfer_set(tfm: TransferMatrix, hvac_channel: int | str) -> LoadTransferSet:
    """Invert the forward map around the HVAC channel (the load relation).

    ``hvac_channel`` is a source name or a channel index.  The HVAC
    entry's numerator must not be identically zero.
    """
    if isinstance(hvac_channel, str):
        idx = tfm.find_channel(hvac_channel)
        hvac_name = hvac_channel
    else:
        idx = int(hvac_channel)
        names = tfm.input_names[idx]
        hvac_name = names[0] if names else tfm.input_labels[idx]
    hvac_num = tfm.entries[idx].num
    if hvac_num.is_zero:
        raise ZeroHvacPathError(
            f"channel {tfm.input_labels[idx]!r} has an identically zero path to the output"
        )
    den = tfm.denominator
    inverse = RationalFunction(den, hvac_num)
    cross = []
    for j, entry in enumerate(tfm.entries):
        if j == idx:
            continue
        term = RationalFunction(-1.0 * entry.num, hvac_num)
        cross.append((tfm.input_labels[j], term, classify(term)))
    passthrough = tuple(
        (name, -1.0) for name in tfm.input_names[idx] if name != hvac_name
    )
    return LoadTransferSet(
        hvac_label=tfm.input_labels[idx],
        output_entry=inverse,
        output_properness=classify(inverse),
        cross_terms=tuple(cross),
        passthrough=passthrough,
    )


def regularize(rf: RationalFunction, tau: float, order: int) -> RationalFunction:
    """Divide by (tau·s + 1)^order to restore properness.

    This is the minimal filter that makes an acausal (improper) relation
    realizable; tau sets the artificial time constant.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if order < 0:
        raise ValueError("order must be >= 0")
    out = RationalFunction(rf.num, rf.den * Polynomial([1.0, tau]) ** order)
    result = classify(out)
    if result.category is PropernessClass.IMPROPER:
        needed = -classify(rf).relative_degree
        raise InsufficientOrderError(
            f"order {order} still improper; need at least {needed}"
        )
    return out


def frequency_response(tfm: TransferMatrix, omegas: np.ndarray) -> np.ndarray:
    """Evaluate every entry at s = j·omega; shape (n_entries, n_omegas)."""
    out = np.empty((len(tfm.entries), len(omegas)), dtype=complex)
    for i, entry in enumerate(tfm.entries):
        for k, w in enumerate(omegas):
            out[i, k] = entry(1j * w)
    return out
