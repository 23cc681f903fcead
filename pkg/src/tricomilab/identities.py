"""Mechanical verification of the tangent-field commutator identities.

Each identity is checked with the strongest available mode:

* symbolic - both sides live in the exact monomial term algebra (possibly
  after multiplying through by the printed polynomial denominator and
  expanding even powers of |x|); the residual is an exact expression.
* symbolic + reconstruction - if a printed identity fails, its right-hand
  scalar factors are re-solved exactly by linear algebra over the term
  space, and the reconstructed identity is reported; the run only fails if
  neither printed nor reconstructed form fits.
* numeric - identities carrying genuinely non-polynomial coefficients
  (odd powers of |x|) are applied to monomial test functions at sampled
  region points; unknown "admissible" coefficient families are fitted per
  point by least squares.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .opalgebra import (
    IdentityReport, OperatorExpr, PointField, VectorFieldCatalog,
    chain_apply, commutator, compose, sample_region, test_functions,
)

Frac = Fraction


# ---------------------------------------------------------------------------
# Exact linear solving over the term space (used to reconstruct typos)
# ---------------------------------------------------------------------------

def exact_fit(target: OperatorExpr, basis: list[OperatorExpr],
              min_order: int = 0):
    """Solve target = sum_k c_k basis_k exactly over Fractions.

    With min_order > 0 only term keys of derivative order >= min_order are
    matched; lower-order content is left as a remainder.  Returns
    (coefficients, remainder) or (None, None) if inconsistent.
    """
    keys = set(target._terms.keys())
    for b in basis:
        keys.update(b._terms.keys())
    keys = sorted((k for k in keys if sum(k[2]) >= min_order), key=repr)
    rows = [[b._terms.get(k, Frac(0)) for b in basis] for k in keys]
    rhs = [target._terms.get(k, Frac(0)) for k in keys]
    ncols = len(basis)
    # Gaussian elimination over Fractions
    aug = [row + [r] for row, r in zip(rows, rhs)]
    pivots = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(aug)) if aug[i][col] != 0), None)
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        pv = aug[r][col]
        aug[r] = [v / pv for v in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [v - f * w for v, w in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
        if r == len(aug):
            break
    for i in range(r, len(aug)):
        if aug[i][ncols] != 0:
            return None, None
    coeffs = [Frac(0)] * ncols
    for row_idx, col in enumerate(pivots):
        coeffs[col] = aug[row_idx][ncols]
    remainder = target
    for c, b in zip(coeffs, basis):
        remainder = remainder - c * b
    if any(sum(k[2]) >= max(min_order, 1) if min_order else True
           for k in remainder._terms):
        if min_order == 0 and not remainder.is_zero():
            return None, None
        if min_order and any(sum(k[2]) >= min_order for k in remainder._terms):
            return None, None
    return coeffs, remainder


# ---------------------------------------------------------------------------
# Identity specifications
# ---------------------------------------------------------------------------

@dataclass
class ExactIdentity:
    name: str
    lhs: OperatorExpr
    rhs: OperatorExpr
    # printed scalar factors to re-solve on failure: (printed value, expr)
    refit: list = field(default_factory=list)
    # known part kept fixed during the refit
    refit_known: OperatorExpr | None = None
    # accept a first-order defect (absorbed by printed admissible a, b terms)
    first_order_slack: bool = False


@dataclass
class NumericIdentity:
    name: str
    lhs: list                 # [(scalar, chain)]
    rhs: list                 # [(scalar, chain)]
    region: str
    fit_basis: list = field(default_factory=list)   # per-point unknown chains
    extended_fns: bool = False


def _verify_exact(ident: ExactIdentity) -> IdentityReport:
    diff = ident.lhs - ident.rhs
    if diff.is_zero():
        return IdentityReport(ident.name, "symbolic", 0.0, "pass")
    if ident.first_order_slack and diff.order <= 1:
        return IdentityReport(
            ident.name, "symbolic", 0.0, "pass",
            detail=f"first-order defect absorbed by admissible terms: {diff!r}")
    if ident.refit:
        target = ident.lhs - (ident.refit_known or OperatorExpr.zero(ident.lhs.n))
        basis = [expr for _, expr in ident.refit]
        min_order = 2 if ident.first_order_slack else 0
        coeffs, remainder = exact_fit(target, basis, min_order=min_order)
        if coeffs is not None:
            printed = [c for c, _ in ident.refit]
            detail = "; ".join(
                f"term {lbl or k}: printed {p}, solved {c}"
                for k, (p, c, lbl) in enumerate(
                    zip(printed, coeffs,
                        [getattr(e, "_label", "") for _, e in ident.refit]))
                if p != c)
            if remainder is not None and not remainder.is_zero():
                detail += f"; first-order remainder absorbed: {remainder!r}"
            return IdentityReport(ident.name, "symbolic", 0.0, "reconstructed",
                                  detail=detail or "printed scalars confirmed",
                                  fitted={"coefficients": [str(c) for c in coeffs]})
    residual = float(max(abs(t.coeff) for t in diff.terms))
    return IdentityReport(ident.name, "symbolic", residual, "fail",
                          detail=repr(diff))


def _verify_numeric(ident: NumericIdentity, m: int, n: int, samples: int,
                    seed: int, tol: float) -> IdentityReport:
    rng = np.random.default_rng(seed)
    points = sample_region(ident.region, m, n, samples, rng)
    fns = test_functions(n) if not ident.extended_fns else _extended_fns(n)
    # rows: one per (test function, point); columns: per-point unknowns
    defect_vals = []
    basis_vals = []
    scale = 0.0
    for f in fns:
        lchain = [(s, chain_apply(list(c), f)) for s, c in ident.lhs]
        rchain = [(s, chain_apply(list(c), f)) for s, c in ident.rhs]
        bchain = [chain_apply(list(c), f) for c in ident.fit_basis]
        drow, brow = [], []
        for p in points:
            t, x = float(p[0]), [float(v) for v in p[1:]]
            lv = sum(s * fn(t, x) for s, fn in lchain)
            rv = sum(s * fn(t, x) for s, fn in rchain)
            drow.append(lv - rv)
            brow.append([fn(t, x) for fn in bchain])
            scale = max(scale, abs(lv), abs(rv))
        defect_vals.append(drow)
        basis_vals.append(brow)
    defect = np.asarray(defect_vals)          # (nf, np)
    scale = max(scale, 1.0)
    if not ident.fit_basis:
        residual = float(np.max(np.abs(defect))) / scale
        verdict = "pass" if residual <= tol else "fail"
        return IdentityReport(ident.name, "numeric", residual, verdict)
    basis = np.asarray(basis_vals)            # (nf, np, nb)
    residual, fitted = _pointwise_fit(defect, basis)
    residual /= scale
    if residual <= tol:
        return IdentityReport(ident.name, "numeric", residual, "pass",
                              detail="per-point admissible coefficients fitted",
                              fitted=fitted)
    # Reconstruction stage: free the printed right-hand scalars globally and
    # refit them jointly with the per-point admissible coefficients.
    rhs_vals = []
    for _, chain in ident.rhs:
        vals = []
        for f in fns:
            fn = chain_apply(list(chain), f)
            vals.append([fn(float(p[0]), [float(v) for v in p[1:]])
                         for p in points])
        rhs_vals.append(vals)
    lhs_only = defect + sum(
        s * np.asarray(v) for (s, _), v in zip(ident.rhs, rhs_vals))
    nf, npts = defect.shape
    nb = basis.shape[2]
    ng = len(rhs_vals)
    rows = nf * npts
    A = np.zeros((rows, ng + npts * nb))
    bvec = np.zeros(rows)
    for fi in range(nf):
        for pj in range(npts):
            row = fi * npts + pj
            for g in range(ng):
                A[row, g] = rhs_vals[g][fi][pj]
            A[row, ng + pj * nb: ng + (pj + 1) * nb] = basis[fi, pj, :]
            bvec[row] = lhs_only[fi, pj]
    sol, *_ = np.linalg.lstsq(A, bvec, rcond=None)
    refit_res = float(np.max(np.abs(A @ sol - bvec))) / scale
    if refit_res <= tol:
        printed = [s for s, _ in ident.rhs]
        detail = "; ".join(f"term {k}: printed {p:g}, refit {sol[k]:.6g}"
                           for k, p in enumerate(printed)
                           if abs(sol[k] - p) > 1e-6 * max(1.0, abs(p)))
        return IdentityReport(ident.name, "numeric", refit_res, "reconstructed",
                              detail=detail or "printed scalars confirmed",
                              fitted={"global_scalars": sol[:ng].tolist()})
    return IdentityReport(ident.name, "numeric", residual, "fail",
                          detail="per-point admissible coefficients fitted",
                          fitted=fitted)


def _pointwise_fit(defect, basis):
    nb = basis.shape[2]
    residual = 0.0
    coef_lo = np.full(nb, np.inf)
    coef_hi = np.full(nb, -np.inf)
    for j in range(defect.shape[1]):
        A = basis[:, j, :]
        b = defect[:, j]
        sol, *_ = np.linalg.lstsq(A, b, rcond=None)
        residual = max(residual, float(np.max(np.abs(A @ sol - b))))
        coef_lo = np.minimum(coef_lo, sol)
        coef_hi = np.maximum(coef_hi, sol)
    return residual, {"coef_min": coef_lo.tolist(), "coef_max": coef_hi.tolist()}


def _extended_fns(n: int):
    fns = list(test_functions(n))
    extra_powers = [(Frac(2), (2, 1)), (Frac(3), (1, 3)), (Frac(5, 2), (3, 1)),
                    (Frac(4), (2, 2)), (Frac(9, 2), (1, 2)), (Frac(2), (0, 2)),
                    (Frac(7, 2), (2, 0)), (Frac(3), (3, 2))]
    from .opalgebra import _monomial
    for t_pow, xp in extra_powers:
        q = (xp + (1,) * n)[:n]
        fns.append(_monomial(t_pow, q))
    return fns


# ---------------------------------------------------------------------------
# Lemma tables
# ---------------------------------------------------------------------------

def _coef(n, coeff, t_power=0, x_powers=None) -> OperatorExpr:
    return OperatorExpr.term(n, coeff, t_power=t_power, x_powers=x_powers)


def _xunit(n, i):
    x = [0] * n
    x[i - 1] = 1
    return x


def _x2sum(n, exclude=None) -> OperatorExpr:
    """Polynomial sum_j x_j^2, optionally excluding one index."""
    expr = OperatorExpr.zero(n)
    for j in range(1, n + 1):
        if j == exclude:
            continue
        x = [0] * n
        x[j - 1] = 2
        expr = expr + OperatorExpr.term(n, 1, x_powers=x)
    return expr


def lemma_42_identities(m: int, n: int) -> list[ExactIdentity]:
    cat = VectorFieldCatalog(m, n)
    P, L0 = cat.P(), cat.L0()
    half = Frac(m, 2)
    out = []
    # 1. [L0, Lbar_i] = 0
    out.append(ExactIdentity(
        "[L0, Lbar_i] = 0",
        _sum([commutator(L0, cat.Lbar(i)) for i in range(1, n + 1)], n),
        OperatorExpr.zero(n)))
    # 2. [L0, L_ij] = 0
    out.append(ExactIdentity(
        "[L0, L_ij] = 0",
        _sum([commutator(L0, cat.L_rot(i, j))
              for i in range(1, n + 1) for j in range(i + 1, n + 1)], n),
        OperatorExpr.zero(n)))
    # 3. [Lbar_i, Lbar_j] = 2(m+1)(m+2) L_ij
    #    + (m(m+2)/2)(x_j t^(-m/2-1) Lbar_i - x_i t^(-m/2-1) Lbar_j)
    lhs3 = OperatorExpr.zero(n)
    rhs3 = OperatorExpr.zero(n)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            lhs3 = lhs3 + commutator(cat.Lbar(i), cat.Lbar(j))
            rhs3 = rhs3 + 2 * (m + 1) * (m + 2) * cat.L_rot(i, j) \
                + Frac(m * (m + 2), 2) * (
                    compose(_coef(n, 1, t_power=-half - 1,
                                  x_powers=_xunit(n, j)), cat.Lbar(i))
                    - compose(_coef(n, 1, t_power=-half - 1,
                                    x_powers=_xunit(n, i)), cat.Lbar(j)))
    out.append(ExactIdentity("[Lbar_i, Lbar_j] table row", lhs3, rhs3))
    # 4. [Lbar_i, L_ij] = Lbar_j
    lhs4 = _sum([commutator(cat.Lbar(i), cat.L_rot(i, j))
                 for i in range(1, n + 1) for j in range(i + 1, n + 1)], n)
    rhs4 = _sum([cat.Lbar(j)
                 for i in range(1, n + 1) for j in range(i + 1, n + 1)], n)
    out.append(ExactIdentity("[Lbar_i, L_ij] = Lbar_j", lhs4, rhs4))
    # 5. [Lbar_k, L_ij] = 0 for k not in {i, j}
    insts = [commutator(cat.Lbar(k), cat.L_rot(i, j))
             for i in range(1, n + 1) for j in range(i + 1, n + 1)
             for k in range(1, n + 1) if k not in (i, j)]
    out.append(ExactIdentity("[Lbar_k, L_ij] = 0 (k distinct)",
                             _sum(insts, n), OperatorExpr.zero(n)))
    # 6. [L_ij, L_kl] = 0 for disjoint pairs (vacuous below n = 4)
    insts6 = [commutator(cat.L_rot(i, j), cat.L_rot(k, l))
              for i in range(1, n + 1) for j in range(i + 1, n + 1)
              for k in range(1, n + 1) for l in range(k + 1, n + 1)
              if len({i, j, k, l}) == 4]
    out.append(ExactIdentity("[L_ij, L_kl] = 0 (disjoint)",
                             _sum(insts6, n), OperatorExpr.zero(n)))
    # 7. [L_ij, L_ik] = L_kj for k != j
    lhs7, rhs7 = OperatorExpr.zero(n), OperatorExpr.zero(n)
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            for k in range(i + 1, n + 1):
                if k == j:
                    continue
                lhs7 = lhs7 + commutator(cat.L_rot(i, j), cat.L_rot(i, k))
                rhs7 = rhs7 + cat.L_rot(k, j)
    out.append(ExactIdentity("[L_ij, L_ik] = L_kj", lhs7, rhs7))
    # 8-10. commutators with P
    out.append(ExactIdentity("[P, L0] = 4P", commutator(P, L0), 4 * P))
    out.append(ExactIdentity(
        "[P, L_ij] = 0",
        _sum([commutator(P, cat.L_rot(i, j))
              for i in range(1, n + 1) for j in range(i + 1, n + 1)], n),
        OperatorExpr.zero(n)))
    lhs10, rhs10 = OperatorExpr.zero(n), OperatorExpr.zero(n)
    for i in range(1, n + 1):
        lhs10 = lhs10 + commutator(P, cat.Lbar(i))
        rhs10 = rhs10 + (-m * (m + 2)) * compose(
            _coef(n, 1, t_power=-half - 1, x_powers=_xunit(n, i)), P) \
            + Frac(m * (m + 2), 4) * compose(_coef(n, 1, t_power=-2), cat.Lbar(i))
    out.append(ExactIdentity("[P, Lbar_i] table row", lhs10, rhs10))
    # 11. Remark 4.1: [P, L_i] with the smooth fields
    lhs11, rhs11 = OperatorExpr.zero(n), OperatorExpr.zero(n)
    for i in range(1, n + 1):
        lhs11 = lhs11 + commutator(P, cat.L_smooth(i))
        inner = compose(cat.dx(i), L0) + (n * (m + 2) - 2) * cat.dx(i)
        for j in range(1, n + 1):
            if j != i:
                inner = inner + (m + 2) * compose(cat.dx(j), cat.L_rot(i, j))
        rhs11 = rhs11 + m * compose(_coef(n, 1, t_power=m - 1), inner)
    out.append(ExactIdentity("[P, L_i] smooth-field row (Remark 4.1)",
                             lhs11, rhs11))
    return out


def _sum(exprs, n) -> OperatorExpr:
    total = OperatorExpr.zero(n)
    for e in exprs:
        total = total + e
    return total


def lemma_43_identities(m: int, n: int) -> list[ExactIdentity]:
    cat = VectorFieldCatalog(m, n)
    P, Lb0, Lb1 = cat.P(), cat.Lbar0(), cat.Lbar(1)
    half = Frac(m, 2)
    out = [ExactIdentity("[Lbar0, Lbar1] = 0", commutator(Lb0, Lb1),
                         OperatorExpr.zero(n))]
    # [Lbar0, R_k] = -(m+2) R_k as printed; the commutator is actually 0
    # (Lbar0 has no x' dependence), so the scalar is re-solved on failure.
    for_rk_l = _sum([commutator(Lb0, cat.R(k)) for k in range(2, n + 1)], n)
    for_rk_r = _sum([(-(m + 2)) * cat.R(k) for k in range(2, n + 1)], n)
    basis_rk = _sum([cat.R(k) for k in range(2, n + 1)], n)
    out.append(ExactIdentity("[Lbar0, R_k] = -(m+2) R_k (printed)",
                             for_rk_l, for_rk_r,
                             refit=[(Frac(-(m + 2)), basis_rk)]))
    out.append(ExactIdentity(
        "[Lbar1, R_k] = 0",
        _sum([commutator(Lb1, cat.R(k)) for k in range(2, n + 1)], n),
        OperatorExpr.zero(n)))
    # [P, Lbar0] = 4P + 2m t^m sum_i d_i R_i (printed); re-solve the 2m.
    dr = _sum([compose(_coef(n, 1, t_power=m), compose(cat.dx(i), cat.R(i)))
               for i in range(2, n + 1)], n)
    out.append(ExactIdentity(
        "[P, Lbar0] = 4P + 2m t^m sum d_i R_i (printed)",
        commutator(P, Lb0), 4 * P + Frac(2 * m) * dr,
        refit=[(Frac(4), P), (Frac(2 * m), dr)]))
    out.append(ExactIdentity(
        "[P, Lbar1] table row",
        commutator(P, Lb1),
        (-m * (m + 2)) * compose(
            _coef(n, 1, t_power=-half - 1, x_powers=_xunit(n, 1)), P)
        + Frac(m * (m + 2), 4) * compose(_coef(n, 1, t_power=-2), Lb1)))
    out.append(ExactIdentity(
        "[P, R_k] = 0",
        _sum([commutator(P, cat.R(k)) for k in range(2, n + 1)], n),
        OperatorExpr.zero(n)))
    return out


def _d_plus(m, n) -> OperatorExpr:
    """4 t^(m+2) - (m+2)^2 |x|^2 as a multiplication operator."""
    return _coef(n, 4, t_power=m + 2) + (-(m + 2) ** 2) * _x2sum(n)


def _d_minus(m, n) -> OperatorExpr:
    return (-1) * _d_plus(m, n)


def lemma_44_identities(m: int, n: int):
    """Lemma 4.4: parts (1) and (3) after multiplying through by the
    denominator and expanding even powers of |x| are exact; (4.9) likewise.
    (4.10)/(4.11) keep odd |x| powers and are verified numerically."""
    if n < 2:
        raise ValueError("Lemma 4.4 regions need n >= 2")
    cat = VectorFieldCatalog(m, n)
    P, L0 = cat.P(), cat.L0()
    half = Frac(m, 2)
    kap = Frac(2, m + 2)
    exact: list[ExactIdentity] = []
    numeric: list[NumericIdentity] = []
    x2 = _x2sum(n)
    Dp = _d_plus(m, n)
    L0sq = compose(L0, L0)
    Lbar_sq = {j: compose(cat.Lbar(j), cat.Lbar(j)) for j in range(1, n + 1)}

    # (1) (N1^0)^2 with N1^0 = |x| d_t:  (N1^0)^2 = |x|^2 d_t^2 exactly.
    sq_n10 = compose(x2, compose(cat.dt(), cat.dt()))
    rhs = (-4) * compose(compose(_coef(n, 1, t_power=m + 2), x2), P) \
        + (-1) * compose(_coef(n, 1, t_power=m),
                         compose(x2, _sum([Lbar_sq[j] for j in range(1, n + 1)], n))) \
        + 4 * compose(_coef(n, 1, t_power=m + 1), compose(x2, compose(cat.dt(), L0))) \
        + (m + 1) * compose(_coef(n, 1, t_power=m), compose(x2, L0)) \
        + (2 * n * m + 2 * n - 2 * m - 2) * compose(
            _coef(n, 1, t_power=m + 1), compose(x2, cat.dt())) \
        + Frac(-m * (m + 2) ** 2, 2) * compose(
            _coef(n, 1, t_power=-1), compose(compose(x2, x2), cat.dt()))
    exact.append(ExactIdentity("4.4(1) (N1^0)^2 row", compose(Dp, sq_n10), rhs,
                               first_order_slack=True))

    # (1) (N1^i)^2 with N1^i = t^(m/2)|x| d_i:
    #     (N1^i)^2 = t^m x_i d_i + t^m |x|^2 d_i^2 exactly.
    for i in range(1, n + 1):
        di = cat.dx(i)
        sq = compose(_coef(n, 1, t_power=m, x_powers=_xunit(n, i)), di) \
            + compose(_coef(n, 1, t_power=m), compose(x2, compose(di, di)))
        bracket = _coef(n, 4, t_power=m + 2) + (-(m + 2) ** 2) * _x2sum(n, exclude=i)
        rhs_i = (-1) * compose(x2, compose(bracket, P)) \
            + compose(_coef(n, 1, t_power=m), compose(x2, L0sq)) \
            + (-1) * compose(_coef(n, 1, t_power=m), compose(
                x2, _sum([Lbar_sq[j] for j in range(1, n + 1) if j != i], n))) \
            + (-2 * (m + 2)) * compose(
                _coef(n, 1, t_power=m, x_powers=_xunit(n, i)),
                compose(x2, compose(di, L0))) \
            + compose(compose(
                _coef(n, Frac((n - 1) * (m + 2) - 2), t_power=m + 2)
                + Frac(-m * (m + 2) ** 2, 4) * _x2sum(n, exclude=i),
                _coef(n, 1, t_power=-2)), compose(x2, L0))
        exact.append(ExactIdentity(f"4.4(1) (N1^{i})^2 row",
                                   compose(Dp, sq), rhs_i,
                                   first_order_slack=True))

    # (2) Eq. (4.9): 2 t^((m+2)/2) Lbar_i = (m+2) x_i L0
    #     - (m+2)^2 sum_k x_k L_ik - ((m+2)^2 |x|^2 - 4 t^(m+2)) d_i
    for i in range(1, n + 1):
        lhs = compose(_coef(n, 2, t_power=half + 1), cat.Lbar(i))
        rhs49 = compose(_coef(n, m + 2, x_powers=_xunit(n, i)), L0)
        for k in range(1, n + 1):
            if k != i:
                rhs49 = rhs49 + (-(m + 2) ** 2) * compose(
                    _coef(n, 1, x_powers=_xunit(n, k)), cat.L_rot(i, k))
        rhs49 = rhs49 + compose(_d_plus(m, n), cat.dx(i))
        exact.append(ExactIdentity(f"4.4(2) Eq.(4.9) i={i}", lhs, rhs49))

    # (2) Eq. (4.10): odd |x| powers survive; numeric with per-point fit.
    r = cat.radius()
    kapf = 2.0 / (m + 2)
    gap = lambda t, x: r(t, x) - kapf * t ** ((m + 2) / 2.0)
    Ecoef = (lambda t, x: (m + 2) * ((m + 2) * r(t, x)
                                     + 2.0 * t ** ((m + 2) / 2.0)))
    for i in range(1, n + 1):
        x2ex = lambda t, x, i=i: sum(x[j] * x[j] for j in range(n) if j != i - 1)
        lhs = [(1.0, [Ecoef, cat.N2(i), cat.N2(i)])]
        rhs410 = [
            (-1.0, [lambda t, x, fx=x2ex: gap(t, x) * (
                4.0 * t * t - (m + 2) ** 2 * fx(t, x) / t ** m), P]),
            (1.0, [gap, L0sq]),
            (-1.0, [gap, _sum([Lbar_sq[j] for j in range(1, n + 1) if j != i], n)]),
            (-2.0 * (m + 2), [lambda t, x, i=i: x[i - 1], cat.N2(i), L0]),
            (1.0, [lambda t, x, fx=x2ex: gap(t, x) * (
                (n - 1) * (m + 2) - 2
                - m * (m + 2) ** 2 / (4.0 * t ** (m + 2)) * fx(t, x)), L0]),
        ]
        numeric.append(NumericIdentity(
            f"4.4(2) Eq.(4.10) i={i}", lhs, rhs410, "omega2",
            fit_basis=[[cat.N2(j)] for j in range(1, n + 1)]))

    # (2) Eq. (4.11): every coefficient admissible; pure per-point fit.
    rots = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    for i in range(1, n + 1):
        basis = [[P], [L0sq]]
        basis += [[compose(cat.L_rot(*a), cat.L_rot(*b))] for a in rots for b in rots]
        basis += [[compose(L0, cat.L_rot(*a))] for a in rots]
        basis += [[cat.N2(j), L0] for j in range(1, n + 1)]
        basis += [[cat.N2(j), cat.L_rot(*a)] for j in range(1, n + 1) for a in rots]
        basis += [[cat.N2(j)] for j in range(1, n + 1)]
        basis += [[L0]]
        numeric.append(NumericIdentity(
            f"4.4(2) Eq.(4.11) i={i}",
            [(1.0, [cat.N2(i), cat.N2(i)])], [], "omega2",
            fit_basis=basis, extended_fns=True))

    # (3) N3 fields are monomial; everything is exact.
    N30, L0sq_ = cat.N3_0(), L0sq
    sq_n30 = compose(N30, N30)
    rhs3a = (-4) * compose(_coef(n, 1, t_power=m + 4), P) \
        + (-1) * compose(_coef(n, 1, t_power=m + 2),
                         _sum([Lbar_sq[j] for j in range(1, n + 1)], n)) \
        + 4 * compose(_coef(n, 1, t_power=m + 2), compose(N30, L0)) \
        + (m + 2) * compose(_coef(n, 1, t_power=m + 2), L0) \
        + compose(_coef(n, 2 * (n - 1) * (m + 2), t_power=m + 2)
                  + Frac(-(4 + m) * (m + 2) ** 2, 2) * x2, N30)
    exact.append(ExactIdentity("4.4(3) (N3^0)^2 row", compose(Dp, sq_n30), rhs3a,
                               first_order_slack=True))
    for i in range(1, n + 1):
        N3i = cat.N3(i)
        lhs = compose(_d_minus(m, n), compose(N3i, N3i))
        bracket = _coef(n, 4, t_power=m + 2) + (-(m + 2) ** 2) * _x2sum(n, exclude=i)
        sum_lb = _sum([Lbar_sq[j] for j in range(1, n + 1) if j != i], n)
        n3l0 = compose(N3i, L0)
        # printed shapes plus candidates with the t^m factor stripped: the
        # printed second-order coefficients mismatch the left side by a
        # global t^m (the re-solve localizes the typo).
        shapes = [
            (Frac(1), compose(_coef(n, 1, t_power=m + 2), compose(bracket, P))),
            (Frac(0), compose(_coef(n, 1, t_power=2), compose(bracket, P))),
            (Frac(-1), compose(_coef(n, 1, t_power=2 * m + 2), L0sq_)),
            (Frac(0), compose(_coef(n, 1, t_power=m + 2), L0sq_)),
            (Frac(1), compose(_coef(n, 1, t_power=2 * m + 2), sum_lb)),
            (Frac(0), compose(_coef(n, 1, t_power=m + 2), sum_lb)),
            (Frac(2 * (m + 2)), compose(
                _coef(n, 1, t_power=Frac(3 * m + 2, 2), x_powers=_xunit(n, i)),
                n3l0)),
            (Frac(0), compose(
                _coef(n, 1, t_power=Frac(m + 2, 2), x_powers=_xunit(n, i)),
                n3l0)),
        ]
        rhs3b = _sum([s * e for s, e in shapes[:1] + shapes[2:3]
                      + shapes[4:5] + shapes[6:7]], n) \
            + compose(_coef(n, Frac(2 - (m + 2) * (n - 1)), t_power=2 * m + 2)
                      + Frac(m * (m + 2) ** 2, 4) * compose(
                          _coef(n, 1, t_power=m), _x2sum(n, exclude=i)), L0)
        exact.append(ExactIdentity(f"4.4(3) (N3^{i})^2 row", lhs, rhs3b,
                                   refit=shapes, first_order_slack=True))
    return exact, numeric


def lemma_45_identities(m: int, n: int):
    """Lemma 4.5 wedge identities; all fields monomial, so everything is
    exact after multiplying through by the printed denominators."""
    if n < 2:
        raise ValueError("Lemma 4.5 regions need n >= 2")
    cat = VectorFieldCatalog(m, n)
    P, Lb0 = cat.P(), cat.Lbar0()
    kap = Frac(2, m + 2)
    half = Frac(m, 2)
    x1 = _xunit(n, 1)
    exact: list[ExactIdentity] = []
    D1m = _coef(n, (m + 2) ** 2, x_powers=[2] + [0] * (n - 1)) \
        + _coef(n, -4, t_power=m + 2)
    Lb0sq = compose(Lb0, Lb0)
    Rsq = _sum([compose(cat.R(k), cat.R(k)) for k in range(2, n + 1)], n)

    # (1) N1 = x_1 d_t
    N1 = cat.N1_wedge()
    shapes1 = [
        (Frac((m + 2) ** 2), compose(
            _coef(n, 1, x_powers=[4] + [0] * (n - 1)), P)),
        (Frac(1), compose(
            _coef(n, 1, t_power=m, x_powers=[2] + [0] * (n - 1)), Lb0sq)),
        (Frac(-4), compose(_coef(n, 1, t_power=m + 1, x_powers=x1),
                           compose(N1, Lb0))),
        (Frac((m + 2) ** 2), compose(
            _coef(n, 1, t_power=m, x_powers=[4] + [0] * (n - 1)), Rsq)),
        (Frac(-(m + 2)), compose(
            _coef(n, 1, t_power=m, x_powers=[2] + [0] * (n - 1)), Lb0)),
        (Frac(2 * (m + 4)), compose(_coef(n, 1, t_power=m + 1, x_powers=x1), N1)),
    ]
    exact.append(ExactIdentity(
        "4.5(1) N1^2 row", compose(D1m, compose(N1, N1)),
        _sum([s * e for s, e in shapes1], n), refit=shapes1))

    # (2) N2,+- = (x_1 -+ kap t^((m+2)/2)) d_1;
    # multiply by (m+2)^2 (x_1 +- kap t^((m+2)/2)).
    for sign, tag in ((1, "+"), (-1, "-")):
        N2pm = cat.N2pm_wedge(sign)
        mult = _coef(n, (m + 2) ** 2, x_powers=x1) \
            + _coef(n, sign * 2 * (m + 2), t_power=half + 1)
        gap = _coef(n, 1, x_powers=x1) + _coef(n, -sign * kap, t_power=half + 1)
        inner = 4 * compose(_coef(n, 1, t_power=2), P) + (-1) * Lb0sq \
            + 4 * compose(_coef(n, 1, t_power=m + 2), Rsq) + 2 * Lb0
        shapes2 = [
            (Frac(1), compose(gap, inner)),
            (Frac(2 * (m + 2)), compose(_coef(n, 1, x_powers=x1),
                                        compose(N2pm, Lb0))),
            (Frac(-2 * (m + 2)), compose(_coef(n, 1, x_powers=x1), N2pm)),
            (Frac(-2 * (m + 2) * sign), compose(
                _coef(n, 1, t_power=half + 1), N2pm)),
        ]
        exact.append(ExactIdentity(
            f"4.5(2) N2{tag}^2 row",
            compose(mult, compose(N2pm, N2pm)),
            _sum([s * e for s, e in shapes2], n), refit=shapes2))

    # (3) N3 = t d_t, N3' = t^((m+2)/2) d_1
    N3, N3p = cat.N3_wedge(), cat.N3p_wedge()
    shapes3 = [
        (Frac((m + 2) ** 2), compose(
            _coef(n, 1, t_power=2, x_powers=[2] + [0] * (n - 1)), P)),
        (Frac(1), compose(_coef(n, 1, t_power=m + 2), Lb0sq)),
        (Frac(-4), compose(_coef(n, 1, t_power=m + 2), compose(N3, Lb0))),
        (Frac((m + 2) ** 2), compose(
            _coef(n, 1, t_power=m + 2, x_powers=[2] + [0] * (n - 1)), Rsq)),
        (Frac(-(m + 2)), compose(_coef(n, 1, t_power=m + 2), Lb0)),
        (Frac((m + 2) ** 2), compose(
            _coef(n, 1, x_powers=[2] + [0] * (n - 1)), N3)),
        (Frac(2 * (m + 2)), compose(_coef(n, 1, t_power=m + 2), N3)),
    ]
    exact.append(ExactIdentity(
        "4.5(3) N3^2 row", compose(D1m, compose(N3, N3)),
        _sum([s * e for s, e in shapes3], n), refit=shapes3))
    shapes3p = [
        (Frac(4), compose(_coef(n, 1, t_power=m + 4), P)),
        (Frac(-1), compose(_coef(n, 1, t_power=m + 2), Lb0sq)),
        (Frac(2 * (m + 2)), compose(_coef(n, 1, t_power=half + 1, x_powers=x1),
                                    compose(N3p, Lb0))),
        (Frac(4), compose(_coef(n, 1, t_power=2 * (m + 2)), Rsq)),
        (Frac(2), compose(_coef(n, 1, t_power=m + 2), Lb0)),
        (Frac(-3 * (m + 2) ** 2), compose(
            _coef(n, 1, t_power=half + 1, x_powers=x1), N3p)),
    ]
    exact.append(ExactIdentity(
        "4.5(3) N3'^2 row", compose(D1m, compose(N3p, N3p)),
        _sum([s * e for s, e in shapes3p], n), refit=shapes3p))
    return exact, []


# ---------------------------------------------------------------------------
# Public driver
# ---------------------------------------------------------------------------

LEMMAS = ("4.2", "4.3", "4.4", "4.5")


def verify_lemma(lemma: str, m: int, n: int, samples: int = 100,
                 seed: int = 0, tol: float = 1e-8) -> list[IdentityReport]:
    if lemma == "4.2":
        exact, numeric = lemma_42_identities(m, n), []
    elif lemma == "4.3":
        exact, numeric = lemma_43_identities(m, n), []
    elif lemma == "4.4":
        exact, numeric = lemma_44_identities(m, n)
    elif lemma == "4.5":
        exact, numeric = lemma_45_identities(m, n)
    else:
        raise ValueError(f"unknown lemma {lemma!r}; choose from {LEMMAS}")
    reports = [_verify_exact(e) for e in exact]
    reports += [_verify_numeric(ident, m, n, samples, seed, tol)
                for ident in numeric]
    return reports


def tangency_residual(m: int, n: int, surface: str = "gamma0",
                      samples: int = 50, seed: int = 0) -> float:
    """Max residual of Z(defining function) over on-surface samples for all
    catalog fields tangent to the surface."""
    cat = VectorFieldCatalog(m, n)
    rng = np.random.default_rng(seed)
    if surface == "gamma0":
        fields = [cat.L0()] + [cat.L_smooth(i) for i in range(1, n + 1)] \
            + [cat.Lbar(i) for i in range(1, n + 1)] \
            + [cat.L_rot(i, j) for i in range(1, n + 1)
               for j in range(i + 1, n + 1)]
        fdef = cat.surface_gamma0()
    elif surface in ("gamma1+", "gamma1-"):
        sign = 1 if surface.endswith("+") else -1
        fields = [cat.Lbar0(), cat.Lbar(1)] + [cat.R(k) for k in range(2, n + 1)]
        fdef = cat.surface_gamma1(sign)
    else:
        raise ValueError(f"unknown surface {surface!r}")
    worst = 0.0
    for _ in range(samples):
        t = rng.uniform(0.2, 1.0)
        radius = 2.0 / (m + 2) * t ** ((m + 2) / 2.0)
        if surface == "gamma0":
            direction = rng.normal(size=n)
            direction /= np.linalg.norm(direction)
            x = radius * direction
        else:
            x = rng.uniform(-0.5, 0.5, size=n)
            x[0] = (1 if surface.endswith("+") else -1) * radius
        for f_ in fields:
            val = chain_apply([f_], fdef)(t, list(x))
            worst = max(worst, abs(val))
    return worst
