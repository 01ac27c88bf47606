"""Matrix-level classifiers for threshold Gaussian vectors.

Everything here is a pure function of the covariance matrix: the
inverse-Stieltjes test, the Savage vector 1'A^{-1} and its Strict/Weak/Fails
trichotomy, the four-condition free-field characterization, the complete
n = 3 large-threshold classifier, degeneracy obstructions, and the
two-parameter (a, b) region map.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .gaussian import CovarianceSpec, ab_cov
from .reports import ClassificationReport, Regime, Verdict

ZERO_BAND = 1e-10       # Savage coordinates within this of 0 count as zero
STIELTJES_TOL = 1e-12
POS_ENTRY_TOL = 1e-12


class SavageStatus(str, Enum):
    STRICT = "Strict"
    WEAK = "Weak"
    FAILS = "Fails"


@dataclass(frozen=True)
class ConditionReport:
    savage_vector: np.ndarray           # 1' A^{-1}, per coordinate
    savage: SavageStatus
    stieltjes_inverse: bool
    stieltjes_offending: list[tuple[int, int, float]]
    dgff: bool
    dgff_failures: list[str]
    quadratic: float                    # 1' A^{-1} 1

    def to_json_dict(self) -> dict:
        return {
            "savage_vector": [float(v) for v in self.savage_vector],
            "savage": self.savage.value,
            "stieltjes_inverse": self.stieltjes_inverse,
            "stieltjes_offending": [[i, j, v] for i, j, v in self.stieltjes_offending],
            "dgff": self.dgff,
            "dgff_failures": list(self.dgff_failures),
            "quadratic": self.quadratic,
        }


def savage_vector(cov: CovarianceSpec) -> np.ndarray:
    return np.ones(cov.n) @ cov.inverse


def savage_status(vec: np.ndarray, band: float = ZERO_BAND) -> SavageStatus:
    if np.min(vec) > band:
        return SavageStatus.STRICT
    if np.min(vec) >= -band:
        return SavageStatus.WEAK
    return SavageStatus.FAILS


def savage_closed_form_3(cov: CovarianceSpec) -> float:
    """First Savage coordinate times det A, in closed form:
    (1 + a_23 - a_12 - a_13)(1 - a_23)."""
    if cov.n != 3 or not cov.is_standard:
        raise ValueError("closed form is for standard n = 3 matrices")
    a = cov.a
    return (1.0 + a[1, 2] - a[0, 1] - a[0, 2]) * (1.0 - a[1, 2])


def is_inverse_stieltjes(cov: CovarianceSpec) -> tuple[bool, list[tuple[int, int, float]]]:
    """True iff all off-diagonal entries of A^{-1} are <= 0 (within 1e-12)."""
    inv = cov.inverse
    bad = []
    for i in range(cov.n):
        for j in range(i + 1, cov.n):
            if inv[i, j] > STIELTJES_TOL:
                bad.append((i + 1, j + 1, float(inv[i, j])))
    return (len(bad) == 0, bad)


def _blocks(cov: CovarianceSpec, tol: float = POS_ENTRY_TOL) -> list[list[int]]:
    """Connected components of the graph with edges a_ij > tol (1-based)."""
    n = cov.n
    seen = [False] * n
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in range(n):
                if not seen[v] and cov.a[u, v] > tol:
                    seen[v] = True
                    stack.append(v)
        comps.append(sorted(i + 1 for i in comp))
    return comps


def is_dgff(cov: CovarianceSpec) -> tuple[bool, list[str]]:
    """Four-condition free-field check.

    (i) block matrix with strictly positive blocks, (ii) inverse Stieltjes,
    (iii) weak Savage, (iv) in each block some row with a strictly positive
    Savage coordinate.
    """
    failures = []
    if not cov.is_pd:
        return False, ["matrix is not positive definite"]
    comps = _blocks(cov)
    for comp in comps:
        sub = cov.a[np.ix_([i - 1 for i in comp], [i - 1 for i in comp])]
        if np.min(sub) <= POS_ENTRY_TOL:
            failures.append(f"block {comp} is not strictly positive")
    ok, bad = is_inverse_stieltjes(cov)
    if not ok:
        failures.append(f"inverse has positive off-diagonal entries {bad}")
    vec = savage_vector(cov)
    if savage_status(vec) is SavageStatus.FAILS:
        failures.append("weak Savage fails: min 1'A^-1 = %.3g" % float(np.min(vec)))
    else:
        for comp in comps:
            if not any(vec[i - 1] > ZERO_BAND for i in comp):
                failures.append(f"block {comp} has no strictly positive Savage coordinate")
    return (len(failures) == 0, failures)


def savage_report(cov: CovarianceSpec) -> ConditionReport:
    vec = savage_vector(cov)
    ok, bad = is_inverse_stieltjes(cov)
    dgff, fails = is_dgff(cov)
    return ConditionReport(
        savage_vector=vec,
        savage=savage_status(vec),
        stieltjes_inverse=ok,
        stieltjes_offending=bad,
        dgff=dgff,
        dgff_failures=fails,
        quadratic=float(np.ones(cov.n) @ cov.inverse @ np.ones(cov.n)),
    )


# -- the complete n = 3 large-threshold classifier ----------------------------

@dataclass(frozen=True)
class LargeHVerdict:
    verdict: Verdict
    case_tag: str                      # "i" | "ii" | "iii" | "zero-cov" | "degenerate"
    savage_vector: np.ndarray | None = None
    quadratic: float | None = None

    @property
    def color_for_large_h(self) -> bool:
        return self.verdict is Verdict.COLOR_REP

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "case_tag": self.case_tag,
            "savage_vector": None if self.savage_vector is None
                else [float(v) for v in self.savage_vector],
            "quadratic": self.quadratic,
        }


def classify_large_h_3(cov: CovarianceSpec) -> LargeHVerdict:
    """Exact trichotomy for fully supported standard triples with a_ij in [0,1).

    All covariances positive: representable for large h iff the Savage vector
    is strictly positive (i), or its minimum is zero (ii), or its minimum is
    negative with 1'A^{-1}1 < 2 (iii).  Exactly one zero covariance kills
    large-h representability; two zeros make it trivial.
    """
    if cov.n != 3:
        raise ValueError("classify_large_h_3 needs n = 3")
    if not cov.is_standard:
        raise ValueError("classifier needs a unit-diagonal matrix")
    off = cov.offdiag()
    if np.min(off) < -POS_ENTRY_TOL:
        raise ValueError("classifier needs nonnegative correlations")
    if not cov.is_pd:
        raise ValueError("degenerate covariance: use classify_degenerate")
    zeros = int(np.sum(np.abs(off) <= POS_ENTRY_TOL))
    if zeros >= 2:
        # at most one nontrivial pair: a product structure, trivially representable
        return LargeHVerdict(Verdict.COLOR_REP, "zero-cov")
    if zeros == 1:
        return LargeHVerdict(Verdict.NO_COLOR_REP, "zero-cov")
    vec = savage_vector(cov)
    quad = float(np.ones(3) @ cov.inverse @ np.ones(3))
    low = float(np.min(vec))
    if low > ZERO_BAND:
        return LargeHVerdict(Verdict.COLOR_REP, "i", vec, quad)
    if low >= -ZERO_BAND:
        return LargeHVerdict(Verdict.COLOR_REP, "ii", vec, quad)
    if quad < 2.0:
        return LargeHVerdict(Verdict.COLOR_REP, "iii", vec, quad)
    return LargeHVerdict(Verdict.NO_COLOR_REP, "iii", vec, quad)


# -- degeneracy obstructions --------------------------------------------------

def classify_degenerate(cov: CovarianceSpec) -> list[ClassificationReport]:
    """Obstructions available when rank(A) < n; empty list for full rank.

    (a) A null relation sum a_i X_i = 0 with sum a_i != 0 (plus full support
        of the reduced subvector) forbids one sign pattern while its
        complement stays charged: no representation for any h > 0.
    (b) Any rank-deficient standard matrix with correlations in [0,1) has no
        representation for large h.
    """
    out: list[ClassificationReport] = []
    if cov.rank == cov.n:
        return out

    if cov.is_standard:
        off = cov.offdiag()
        if off.size and np.min(off) >= -POS_ENTRY_TOL and np.max(off) < 1.0:
            out.append(ClassificationReport(
                Verdict.NO_COLOR_REP, Regime.LARGE_H, "classify_degenerate",
                witness={"rank": cov.rank, "n": cov.n,
                         "reason": "not fully supported"}))

    vals, vecs = np.linalg.eigh(cov.a)
    cutoff = 1e-10 * vals[-1]
    null = vecs[:, vals <= cutoff]
    if null.shape[1] > 0:
        coeff = null @ (null.T @ np.ones(cov.n))  # projection of 1 onto the null space
        norm = float(np.linalg.norm(coeff))
        if norm > 1e-9:
            a = coeff / norm
            support = [i for i in range(cov.n) if abs(a[i]) > 1e-9]
            sub = cov.a[np.ix_(support, support)]
            sub_vals = np.linalg.eigvalsh(sub)
            sub_rank = int(np.sum(sub_vals > 1e-10 * sub_vals[-1]))
            if sub_rank == len(support) - 1 and len(support) >= 2:
                pos = sum(a[i] for i in support if a[i] > 0)
                neg = -sum(a[i] for i in support if a[i] < 0)
                if pos >= neg:
                    a = -a
                pattern = ["-"] * cov.n
                required = ["-"] * cov.n
                for i in support:
                    pattern[i] = "1" if a[i] < 0 else "0"
                    required[i] = "0" if a[i] < 0 else "1"
                out.append(ClassificationReport(
                    Verdict.NO_COLOR_REP, Regime.ALL_POSITIVE_H, "classify_degenerate",
                    witness={"null_vector": [float(v) for v in a],
                             "forbidden_pattern": "".join(pattern),
                             "required_pattern": "".join(required)}))
    return out


# -- the (a, b) example region map --------------------------------------------

@dataclass(frozen=True)
class ABRegion:
    """Region data for the family (1, a, a; a, 1, b; a, b, 1)."""

    a: float
    b: float
    pd: bool
    numerically_pd: bool       # False on the razor edge of the PD boundary
    large_h_color: bool
    dgff: bool
    markov_gap: float          # b - a^2; zero on the Markov-chain boundary
    savage_min: float
    pd_margin: float           # 1 + b - 2 a^2; positive iff PD
    case_tag: str | None

    @property
    def markov_boundary(self) -> bool:
        return abs(self.markov_gap) <= 1e-12

    def cov(self) -> CovarianceSpec:
        return ab_cov(self.a, self.b)


def ab_region_classify(a: float, b: float) -> ABRegion:
    """Evaluate the displayed inequalities for the two-parameter family.

    PD iff 2a^2 < 1 + b; representable for large h iff 2a - 1 <= b or
    (2a - 1)^2 < b; the line b = a^2 is the Gaussian Markov chain boundary
    (also the free-field boundary).
    """
    if not (0.0 < a < 1.0 and 0.0 < b < 1.0):
        raise ValueError("a and b must lie in (0,1)")
    pd = 2.0 * a * a < 1.0 + b
    large = (2.0 * a - 1.0 <= b) or ((2.0 * a - 1.0) ** 2 < b)
    dgff = False
    savage_min = float("nan")
    case = None
    cov = ab_cov(a, b) if pd else None
    if cov is not None and not cov.is_pd:
        cov = None  # razor-edge of the PD boundary: skip matrix enrichments
    if cov is not None:
        dgff = is_dgff(cov)[0]
        verdict = classify_large_h_3(cov)
        savage_min = float(np.min(verdict.savage_vector)) \
            if verdict.savage_vector is not None else float("nan")
        case = verdict.case_tag
        on_boundary = (verdict.quadratic is not None
                       and abs(verdict.quadratic - 2.0) <= 1e-9)
        if verdict.color_for_large_h != large and not on_boundary:
            # exactly on b = (2a-1)^2 the quadratic form equals 2 and rounding
            # may land either side; anywhere else the two forms must agree
            raise AssertionError(
                f"classifier and closed-form region disagree at (a={a}, b={b})")
    return ABRegion(a=a, b=b, pd=pd, numerically_pd=cov is not None,
                    large_h_color=large, dgff=dgff,
                    markov_gap=b - a * a, savage_min=savage_min,
                    pd_margin=1.0 + b - 2.0 * a * a, case_tag=case)
