"""Primal-dual interior-point solver for the block SDPs built by `model`.

The algorithm is a path-following method on the homogeneous self-dual
embedding with Nesterov-Todd scaling and a Mehrotra predictor-corrector,
so it returns either a certified optimal point or an infeasibility /
unboundedness certificate.  Complex Hermitian blocks enter through their
real symmetric embedding; blocks of equal size are processed as stacked
numpy arrays so the per-iteration work is a handful of batched LAPACK
calls plus one dense Schur-complement factorization.

Dimension-one blocks and inequality slacks live in a nonnegative-orthant
section; the hypograph variable tau is kept as an explicit free scalar.
Rows and block columns are Ruiz-equilibrated before the iteration and all
reported quantities are mapped back to the original units.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import InvalidSolution
from .linalg import complex_recovery, hermitian_part, real_embedding, trace_inner
from .model import SdpProblem

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"
NUMERICAL_FAILURE = "NumericalFailure"
ITER_LIMIT = "IterLimit"

_TINY = 1e-300


@dataclass(frozen=True)
class SolverSettings:
    tol_gap: float = 1e-8
    tol_feas: float = 1e-8
    max_iters: int = 200
    step_fraction: float = 0.98
    verbose: bool = False

    def __post_init__(self):
        if min(self.tol_gap, self.tol_feas) <= 0 or self.max_iters <= 0:
            raise ValueError("tolerances and max_iters must be positive")
        if not 0.0 < self.step_fraction < 1.0:
            raise ValueError("step_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class SdpDuals:
    """Multipliers in the sign convention of the primal maximization problem."""

    delta: np.ndarray        # SINR rows, >= 0
    lam: float               # power budget row, >= 0
    beta: np.ndarray         # harvested-power rows, >= 0, sums to 1
    x_mats: dict             # (j, k) -> PSD dual of the capacity LMI
    y_mat: np.ndarray        # dual slack of the noise block
    z_mats: tuple            # dual slack of each beam-covariance block


@dataclass
class SdpSolution:
    status: str
    tau: float | None = None
    w_cov: tuple | None = None          # recovered n_tx x n_tx beam covariances
    noise_cov: np.ndarray | None = None
    duals: SdpDuals | None = None
    gap: float = np.inf
    feas_residuals: dict = field(default_factory=dict)
    iterations: int = 0
    block_values: dict = field(default_factory=dict)   # label -> complex matrix
    block_duals: dict = field(default_factory=dict)    # label -> complex matrix
    y: np.ndarray | None = None                        # row multipliers
    objective_values: tuple = (np.nan, np.nan)         # (primal, dual) of max form


# ---------------------------------------------------------------------------
# Problem preparation: real embedding, slack insertion, equilibration.
# ---------------------------------------------------------------------------

class _Group:
    """All PSD blocks sharing one real dimension, stacked along axis 0."""

    def __init__(self, dr: int, slots: list[int], m: int):
        self.dr = dr
        self.slots = slots                       # problem block indices
        self.nb = len(slots)
        self.pos = {bi: i for i, bi in enumerate(slots)}
        self.A = np.zeros((m, self.nb, dr, dr))
        iu = np.triu_indices(dr)
        self.iu = iu
        self.wsv = np.where(iu[0] == iu[1], 1.0, np.sqrt(2.0))
        self.col_scale = np.ones(self.nb)

    def svec_rows(self, t: np.ndarray) -> np.ndarray:
        # t: (m, nb, dr, dr) -> (m, nb * len(iu))
        v = t[:, :, self.iu[0], self.iu[1]] * self.wsv
        return v.reshape(t.shape[0], -1)


class _Prepared:
    def __init__(self, problem: SdpProblem):
        self.problem = problem
        rows = problem.rows
        m = len(rows)
        self.m = m
        self.row_index = {r.label: i for i, r in enumerate(rows)}

        orth_blocks = [i for i, b in enumerate(problem.blocks) if b.dim == 1]
        psd_dims: dict[int, list[int]] = {}
        for i, b in enumerate(problem.blocks):
            if b.dim > 1:
                psd_dims.setdefault(2 * b.dim, []).append(i)
        self.groups = [_Group(dr, slots, m) for dr, slots in sorted(psd_dims.items())]
        self.block_loc: dict[int, tuple] = {}
        for gi, g in enumerate(self.groups):
            for bi in g.slots:
                self.block_loc[bi] = ("psd", gi, g.pos[bi])

        n_scalar = len(orth_blocks)
        slack_rows = [(i, -1.0 if r.sense == "ge" else 1.0)
                      for i, r in enumerate(rows) if r.sense != "eq"]
        nl = n_scalar + len(slack_rows)
        self.nl = nl
        self.n_scalar = n_scalar
        self.Al = np.zeros((m, n_scalar))
        for col, bi in enumerate(orth_blocks):
            self.block_loc[bi] = ("orth", col, None)

        self.F = np.array([r.tau_coeff for r in rows])
        self.b = np.array([r.rhs for r in rows])
        self.b_orig = self.b.copy()

        for ri, row in enumerate(rows):
            for bi, coeff in row.terms:
                kind, a, slot = self.block_loc[bi]
                if kind == "orth":
                    self.Al[ri, a] = float(coeff.real[0, 0])
                else:
                    self.groups[a].A[ri, slot] = real_embedding(coeff) / 2.0

        self.row_scale = np.ones(m)     # multiplier applied to each row
        self.orth_scale = np.ones(n_scalar)
        self.f_scale = 1.0
        # slacks join after equilibration so their unit coefficients do not
        # pin the row norms; a slack then lives in its row's scaled units
        self._equilibrate()
        if slack_rows:
            ext = np.zeros((m, len(slack_rows)))
            for si, (ri, sign) in enumerate(slack_rows):
                ext[ri, si] = sign
            self.Al = np.hstack([self.Al, ext])
            self.orth_scale = np.concatenate([self.orth_scale, np.ones(len(slack_rows))])
        self.cf = -self.f_scale         # minimize -tau in scaled units

    def _equilibrate(self, passes: int = 3) -> None:
        for _ in range(passes):
            rn = np.abs(self.F).copy()
            if self.Al.shape[1]:
                rn = np.maximum(rn, np.abs(self.Al).max(axis=1))
            for g in self.groups:
                if g.nb:
                    rn = np.maximum(rn, np.abs(g.A).reshape(self.m, -1).max(axis=1))
            rs = 1.0 / np.sqrt(np.maximum(rn, _TINY))
            rs[rn == 0] = 1.0
            self._scale_rows(rs)

            if self.Al.shape[1]:
                cn = np.abs(self.Al).max(axis=0)
                cs = 1.0 / np.sqrt(np.maximum(cn, _TINY))
                cs[cn == 0] = 1.0
                self.Al *= cs[None, :]
                self.orth_scale *= cs
            for g in self.groups:
                if not g.nb:
                    continue
                cn = np.abs(g.A).max(axis=(0, 2, 3))
                cs = 1.0 / np.sqrt(np.maximum(cn, _TINY))
                cs[cn == 0] = 1.0
                g.A *= cs[None, :, None, None]
                g.col_scale *= cs
            fn = np.abs(self.F).max(initial=0.0)
            if fn > 0:
                fs = 1.0 / np.sqrt(fn)
                self.F *= fs
                self.f_scale *= fs

    def _scale_rows(self, rs: np.ndarray) -> None:
        self.row_scale *= rs
        self.F *= rs
        self.b *= rs
        if self.Al.shape[1]:
            self.Al *= rs[:, None]
        for g in self.groups:
            if g.nb:
                g.A *= rs[:, None, None, None]

    # A applied to cone coordinates (+ free part added by caller)
    def apply_A(self, xg: list[np.ndarray], xl: np.ndarray) -> np.ndarray:
        out = self.Al @ xl if self.nl else np.zeros(self.m)
        for g, x in zip(self.groups, xg):
            out = out + np.einsum("mnpq,npq->m", g.A, x)
        return out

    def apply_AT(self, y: np.ndarray):
        xg = [np.einsum("m,mnpq->npq", y, g.A) for g in self.groups]
        xl = self.Al.T @ y if self.nl else np.zeros(0)
        return xg, xl


# ---------------------------------------------------------------------------
# The interior-point iteration.
# ---------------------------------------------------------------------------

class _State:
    def __init__(self, prep: _Prepared):
        self.xg = [np.tile(np.eye(g.dr), (g.nb, 1, 1)) for g in prep.groups]
        self.sg = [x.copy() for x in self.xg]
        self.zg = [x.copy() for x in self.xg]
        self.xl = np.ones(prep.nl)
        self.sl = np.ones(prep.nl)
        self.zl = np.ones(prep.nl)
        self.f = 0.0
        self.y = np.zeros(prep.m)
        self.theta = 1.0
        self.kappa = 1.0
        self.degree = sum(g.nb * g.dr for g in prep.groups) + prep.nl + 1


def _cone_inner(ag, al, bg, bl) -> float:
    tot = float(al @ bl) if al.size else 0.0
    for a, b in zip(ag, bg):
        tot += float(np.einsum("npq,npq->", a, b))
    return tot


class _Scaling:
    """Per-iteration NT scaling data for every cone section."""

    def __init__(self, prep: _Prepared, st: _State):
        self.R, self.Rinv, self.lam, self.Gnt, self.Ls_inv, self.Lz_inv = [], [], [], [], [], []
        for g, s, z in zip(prep.groups, st.sg, st.zg):
            ls = np.linalg.cholesky(s)
            lz = np.linalg.cholesky(z)
            u, sv, vt = np.linalg.svd(np.transpose(lz, (0, 2, 1)) @ ls)
            sq = np.sqrt(sv)
            r = ls @ np.transpose(vt, (0, 2, 1)) / sq[:, None, :]
            ls_inv = np.linalg.inv(ls)
            lz_inv = np.linalg.inv(lz)
            rinv = sq[:, :, None] * (vt @ ls_inv)
            self.R.append(r)
            self.Rinv.append(rinv)
            self.lam.append(sv)
            self.Gnt.append(r @ np.transpose(r, (0, 2, 1)))
            self.Ls_inv.append(ls_inv)
            self.Lz_inv.append(lz_inv)
        self.wl = np.sqrt(st.sl / st.zl) if prep.nl else np.zeros(0)
        self.laml = np.sqrt(st.sl * st.zl) if prep.nl else np.zeros(0)
        self.Hl = st.sl / st.zl if prep.nl else np.zeros(0)

    def H_psd(self, gi: int, mat: np.ndarray) -> np.ndarray:
        gnt = self.Gnt[gi]
        return gnt @ mat @ gnt


def _max_step_psd(l_inv: np.ndarray, d: np.ndarray) -> float:
    # largest a with  chol_arg + a*d  psd, given l_inv = inv(chol(chol_arg))
    md = l_inv @ d @ np.transpose(l_inv, (0, 2, 1))
    emin = np.linalg.eigvalsh(0.5 * (md + np.transpose(md, (0, 2, 1))))[:, 0].min()
    return np.inf if emin >= 0 else 1.0 / (-emin)


def _max_step_orth(v: np.ndarray, d: np.ndarray) -> float:
    neg = d < 0
    if not np.any(neg):
        return np.inf
    return float((v[neg] / -d[neg]).min())


def solve(problem: SdpProblem, settings: SolverSettings | None = None,
          log_stream=None) -> SdpSolution:
    """Solve a built problem; returns a solution with certificates and duals."""
    settings = settings or SolverSettings()
    prep = _Prepared(problem)
    st = _State(prep)
    log = log_stream or sys.stderr

    b, F, cf, m = prep.b, prep.F, prep.cf, prep.m
    b_norm = 1.0 + np.linalg.norm(prep.b_orig)
    status = ITER_LIMIT
    it = 0
    small_steps = 0
    no_progress = 0
    best_score = np.inf
    best_state = None
    info: dict = {}

    def snapshot():
        return ([x.copy() for x in st.xg], st.xl.copy(), st.f, st.y.copy(),
                [z.copy() for z in st.zg], st.zl.copy(),
                [s.copy() for s in st.sg], st.sl.copy(), st.theta, st.kappa)

    def restore(snap):
        st.xg, st.xl, st.f, st.y, st.zg, st.zl, st.sg, st.sl, st.theta, st.kappa = snap

    for it in range(settings.max_iters):
        # residuals of the self-dual system
        r1g = [s - x for s, x in zip(st.sg, st.xg)]
        r1l = st.sl - st.xl
        r2 = prep.apply_A(st.xg, st.xl) + F * st.f - b * st.theta
        aty_g, aty_l = prep.apply_AT(st.y)
        r3g = [a - z for a, z in zip(aty_g, st.zg)]
        r3l = aty_l - st.zl
        r3f = float(F @ st.y) + cf * st.theta
        r4 = -cf * st.f - float(b @ st.y) - st.kappa

        gap = _cone_inner(st.sg, st.sl, st.zg, st.zl)
        mu = (gap + st.theta * st.kappa) / st.degree
        th = st.theta

        pcost = cf * st.f / th            # min form: -tau
        dcost = -float(b @ st.y) / th     # min form dual
        # unscaled relative residuals
        pres = np.linalg.norm(r2 / np.maximum(prep.row_scale, _TINY)) / th / b_norm
        r1n = np.linalg.norm(r1l) if r1l.size else 0.0
        for r1 in r1g:
            r1n = max(r1n, np.abs(r1).max(initial=0.0))
        pres = max(pres, r1n / th)
        dmax = abs(r3f / prep.f_scale)
        if prep.nl:
            dmax = max(dmax, np.abs(r3l / np.maximum(prep.orth_scale, _TINY)).max())
        for g, r3 in zip(prep.groups, r3g):
            if g.nb:
                dmax = max(dmax, (np.abs(r3).max(axis=(1, 2)) /
                                  np.maximum(g.col_scale, _TINY)).max())
        dres = dmax / th / 2.0
        relgap = max(gap / th / th, abs(pcost - dcost)) / (1.0 + abs(pcost))

        if settings.verbose:
            print(f"iter {it:3d}  pcost {pcost: .6e}  dcost {dcost: .6e}  "
                  f"pres {pres:.2e}  dres {dres:.2e}  gap {relgap:.2e}  "
                  f"theta {st.theta:.2e}  kappa {st.kappa:.2e}", file=log)

        score = max(pres, dres, relgap)
        if score < 0.9 * best_score:
            best_score = score
            best_state = snapshot()
            no_progress = 0
        else:
            no_progress += 1

        if pres <= settings.tol_feas and dres <= settings.tol_feas and relgap <= settings.tol_gap:
            status = OPTIMAL
            info = {"primal": pres, "dual": dres, "gap_rel": relgap,
                    "gap": gap / th / th, "pcost": -pcost, "dcost": -dcost}
            break
        if no_progress >= 10:
            status = NUMERICAL_FAILURE
            info = {"reason": "progress stalled", "best_score": best_score}
            break

        # infeasibility / unboundedness certificates, checked once the
        # homogenizing variable starts collapsing
        if st.theta < 0.1:
            by = float(b @ st.y)
            if by < -1e-12:
                cert = abs(r3f - cf * st.theta)   # |F^T y|, the c*theta part removed
                if prep.nl:
                    cert = max(cert, np.abs(r3l).max(initial=0.0))
                for r3 in r3g:
                    if r3.size:
                        cert = max(cert, np.abs(r3).max(initial=0.0))
                if cert / (-by) <= settings.tol_feas:
                    status = INFEASIBLE
                    info = {"certificate": -by, "residual": cert / (-by)}
                    break
            ctu = cf * st.f
            if -ctu > 1e-12:
                res = np.linalg.norm(r2 + b * st.theta)   # = ||A u + F f||
                res = max(res, r1n)
                if res / (-ctu) <= settings.tol_feas:
                    status = UNBOUNDED
                    info = {"certificate": -ctu}
                    break

        # Nesterov-Todd scaling and Schur complement
        try:
            sc = _Scaling(prep, st)
        except np.linalg.LinAlgError:
            status = NUMERICAL_FAILURE
            info = {"reason": "cone variable lost definiteness"}
            break
        cols = []
        for gi, g in enumerate(prep.groups):
            if not g.nb:
                continue
            t = np.einsum("npq,mnpr,nrs->mnqs", sc.R[gi], g.A, sc.R[gi])
            cols.append(g.svec_rows(t))
        if prep.nl:
            cols.append(prep.Al * np.sqrt(sc.Hl)[None, :])
        amat = np.hstack(cols) if cols else np.zeros((m, 0))
        s_m = amat @ amat.T
        try:
            factor = cho_factor(s_m + np.eye(m) * (1e-14 * max(1.0, np.trace(s_m) / m)))
        except np.linalg.LinAlgError:
            status = NUMERICAL_FAILURE
            info = {"reason": "Schur complement factorization failed"}
            break

        def schur_solve(rhs):
            # one round of iterative refinement keeps direction accuracy
            # when the Schur complement turns ill-conditioned near the optimum
            t = cho_solve(factor, rhs)
            t += cho_solve(factor, rhs - s_m @ t)
            return t

        t1 = schur_solve(F)
        ft1 = float(F @ t1)

        def inner_solve(qg, ql, qf, ry):
            hq_g = [sc.H_psd(gi, q) for gi, q in enumerate(qg)]
            hq_l = sc.Hl * ql if prep.nl else ql
            ahq = prep.apply_A(hq_g, hq_l)
            t2 = schur_solve(ahq - ry)
            df = (qf - float(F @ t2)) / ft1
            dy = t2 + t1 * df
            aty_g2, aty_l2 = prep.apply_AT(dy)
            wg = [sc.H_psd(gi, q - a) for gi, (q, a) in enumerate(zip(qg, aty_g2))]
            wl = sc.Hl * (ql - aty_l2) if prep.nl else ql
            return wg, wl, df, dy

        # theta-column system, reused by both directions this iteration
        zeros_g = [np.zeros_like(x) for x in st.xg]
        zeros_l = np.zeros(prep.nl)
        w1g, w1l, df1, dy1 = inner_solve(zeros_g, zeros_l, -cf, b)
        denom = -cf * df1 - float(b @ dy1) + st.kappa / st.theta

        a_r1 = prep.apply_A(r1g, r1l)

        def direction(eta, d_psd, d_orth, d_tk):
            zd_g = []
            for gi, d in enumerate(d_psd):
                lam = sc.lam[gi]
                den = lam[:, :, None] + lam[:, None, :]
                ld = 2.0 * d / den
                zd_g.append(np.transpose(sc.Rinv[gi], (0, 2, 1)) @ ld @ sc.Rinv[gi])
            zd_l = d_orth / np.maximum(st.sl, _TINY) if prep.nl else d_orth
            qg = [-eta * r3 + zd for r3, zd in zip(r3g, zd_g)]
            ql = -eta * r3l + zd_l
            qf = -eta * r3f
            ry = -eta * (r2 + a_r1)
            w2g, w2l, df2, dy2 = inner_solve(qg, ql, qf, ry)
            dtheta = (-eta * r4 + cf * df2 + float(b @ dy2) + d_tk / st.theta) / denom
            dsg = [w2 + dtheta * w1 for w2, w1 in zip(w2g, w1g)]
            dsl = w2l + dtheta * w1l
            dxg = [ds + eta * r1 for ds, r1 in zip(dsg, r1g)]
            dxl = dsl + eta * r1l
            df_t = df2 + dtheta * df1
            dy_t = dy2 + dtheta * dy1
            aty_gt, aty_lt = prep.apply_AT(dy_t)
            dzg = [eta * r3 + a for r3, a in zip(r3g, aty_gt)]
            dzl = eta * r3l + aty_lt
            dkappa = (d_tk - st.kappa * dtheta) / st.theta
            return dxg, dxl, df_t, dy_t, dzg, dzl, dsg, dsl, dtheta, dkappa

        def max_step(dsg, dsl, dzg, dzl, dtheta, dkappa):
            a = np.inf
            for gi in range(len(prep.groups)):
                if prep.groups[gi].nb:
                    a = min(a, _max_step_psd(sc.Ls_inv[gi], dsg[gi]))
                    a = min(a, _max_step_psd(sc.Lz_inv[gi], dzg[gi]))
            if prep.nl:
                a = min(a, _max_step_orth(st.sl, dsl), _max_step_orth(st.zl, dzl))
            if dtheta < 0:
                a = min(a, st.theta / -dtheta)
            if dkappa < 0:
                a = min(a, st.kappa / -dkappa)
            return a

        # predictor
        d_psd_aff = []
        for gi in range(len(prep.groups)):
            lam = sc.lam[gi]
            d = np.zeros((prep.groups[gi].nb, prep.groups[gi].dr, prep.groups[gi].dr))
            idx = np.arange(prep.groups[gi].dr)
            d[:, idx, idx] = -lam ** 2
            d_psd_aff.append(d)
        d_orth_aff = -sc.laml ** 2 if prep.nl else np.zeros(0)
        aff = direction(1.0, d_psd_aff, d_orth_aff, -st.theta * st.kappa)
        a_aff = min(1.0, max_step(aff[6], aff[7], aff[4], aff[5], aff[8], aff[9]))

        gap_aff = _cone_inner([s + a_aff * d for s, d in zip(st.sg, aff[6])],
                              st.sl + a_aff * aff[7],
                              [z + a_aff * d for z, d in zip(st.zg, aff[4])],
                              st.zl + a_aff * aff[5])
        mu_aff = (gap_aff + (st.theta + a_aff * aff[8]) * (st.kappa + a_aff * aff[9])) / st.degree
        sigma = float(np.clip((max(mu_aff, 0.0) / mu) ** 3, 0.0, 1.0 - 1e-9))

        # combined direction with Mehrotra correction
        d_psd = []
        for gi in range(len(prep.groups)):
            ds_h = sc.Rinv[gi] @ aff[6][gi] @ np.transpose(sc.Rinv[gi], (0, 2, 1))
            dz_h = np.transpose(sc.R[gi], (0, 2, 1)) @ aff[4][gi] @ sc.R[gi]
            corr = 0.5 * (ds_h @ dz_h + dz_h @ ds_h)
            d = -corr
            idx = np.arange(prep.groups[gi].dr)
            d[:, idx, idx] += sigma * mu - sc.lam[gi] ** 2
            d_psd.append(d)
        if prep.nl:
            ds_h = aff[7] / sc.wl
            dz_h = sc.wl * aff[5]
            d_orth = sigma * mu - sc.laml ** 2 - ds_h * dz_h
        else:
            d_orth = np.zeros(0)
        d_tk = sigma * mu - st.theta * st.kappa - aff[8] * aff[9]

        comb = direction(1.0 - sigma, d_psd, d_orth, d_tk)
        a_max = max_step(comb[6], comb[7], comb[4], comb[5], comb[8], comb[9])
        alpha = min(1.0, settings.step_fraction * a_max)
        if alpha < 1e-8:
            small_steps += 1
            if small_steps >= 3:
                status = NUMERICAL_FAILURE
                info = {"reason": "step size collapsed"}
                break
        else:
            small_steps = 0

        for gi in range(len(prep.groups)):
            st.xg[gi] += alpha * comb[0][gi]
            st.sg[gi] += alpha * comb[6][gi]
            st.zg[gi] += alpha * comb[4][gi]
            st.sg[gi] = 0.5 * (st.sg[gi] + np.transpose(st.sg[gi], (0, 2, 1)))
            st.zg[gi] = 0.5 * (st.zg[gi] + np.transpose(st.zg[gi], (0, 2, 1)))
            st.xg[gi] = 0.5 * (st.xg[gi] + np.transpose(st.xg[gi], (0, 2, 1)))
        if prep.nl:
            st.xl += alpha * comb[1]
            st.sl += alpha * comb[7]
            st.zl += alpha * comb[5]
        st.f += alpha * comb[2]
        st.y += alpha * comb[3]
        st.theta += alpha * comb[8]
        st.kappa += alpha * comb[9]
    else:
        it = settings.max_iters

    return _package(problem, prep, st, status, info, it + 1 if status != ITER_LIMIT else it)


# ---------------------------------------------------------------------------
# Mapping the scaled self-dual iterate back to problem-level quantities.
# ---------------------------------------------------------------------------

def _package(problem: SdpProblem, prep: _Prepared, st: _State, status: str,
             info: dict, iters: int) -> SdpSolution:
    sol = SdpSolution(status=status, iterations=iters, feas_residuals=info)
    if status in (INFEASIBLE, UNBOUNDED, NUMERICAL_FAILURE):
        return sol
    if status == ITER_LIMIT:
        return sol

    th = st.theta
    block_values: dict = {}
    block_duals: dict = {}
    for bi, spec in enumerate(problem.blocks):
        kind, a, slot = prep.block_loc[bi]
        if kind == "orth":
            d = prep.orth_scale[a]
            block_values[spec.label] = np.array([[st.xl[a] * d / th]], dtype=complex)
            block_duals[spec.label] = np.array([[st.zl[a] / d / th]], dtype=complex)
        else:
            g = prep.groups[a]
            d = g.col_scale[slot]
            block_values[spec.label] = complex_recovery(st.xg[a][slot]) * d / th
            block_duals[spec.label] = complex_recovery(st.zg[a][slot]) * 2.0 / d / th
    y_out = -(st.y * prep.row_scale) / th
    tau = prep.f_scale * st.f / th

    bv_by_index = {bi: block_values[problem.blocks[bi].label]
                   for bi in range(len(problem.blocks))}
    w_cov = tuple(v.recover(bv_by_index) for v in problem.w_vars)
    noise_cov = problem.v_var.recover(bv_by_index)

    k_n = problem.n_info
    j_n = len({jk[0] for jk in problem.s_block_index}) if problem.s_block_index else 0
    delta = np.array([y_out[prep.row_index[f"C1[{k}]"]] for k in range(k_n)])
    lam = -y_out[prep.row_index["C3"]]
    beta = np.array([y_out[prep.row_index[f"C7[{j}]"]] for j in range(j_n)])
    x_mats = {jk: block_duals[problem.blocks[bi].label]
              for jk, bi in problem.s_block_index.items()}
    y_mat = block_duals[problem.blocks[problem.v_var.components[0][0]].label]
    z_mats = tuple(block_duals[problem.blocks[v.components[0][0]].label]
                   for v in problem.w_vars)

    sol.tau = float(tau)
    sol.w_cov = w_cov
    sol.noise_cov = noise_cov
    sol.block_values = block_values
    sol.block_duals = block_duals
    sol.y = y_out
    sol.duals = SdpDuals(delta=delta, lam=float(lam), beta=beta, x_mats=x_mats,
                         y_mat=y_mat, z_mats=z_mats)
    sol.gap = info.get("gap", np.inf)
    sol.objective_values = (info.get("pcost", np.nan), info.get("dcost", np.nan))
    return sol


# ---------------------------------------------------------------------------
# KKT residual report on the original complex-level problem.
# ---------------------------------------------------------------------------

@dataclass
class KktReport:
    primal: dict          # family -> max violation, normalized by 1 + |rhs|
    dual: dict            # per-block stationarity norms + multiplier sign check
    complementarity: dict
    gap: float
    tau: float
    dual_objective: float

    def max_primal(self) -> float:
        return max(self.primal.values(), default=0.0)

    def max_dual(self) -> float:
        return max(self.dual.values(), default=0.0)

    def max_complementarity(self) -> float:
        return max(self.complementarity.values(), default=0.0)

    def max_violation(self) -> float:
        return max(self.max_primal(), self.max_dual(), self.max_complementarity(),
                   self.gap)


def _family(label: str) -> str:
    return label.split("[")[0].split(":")[0]


def kkt_residuals(problem: SdpProblem, solution: SdpSolution) -> KktReport:
    """Recompute feasibility, stationarity, and complementarity in original units."""
    if solution.tau is None or solution.y is None:
        raise InvalidSolution("KKT residuals require a solved problem with duals")
    bv = {bi: solution.block_values[problem.blocks[bi].label]
          for bi in range(len(problem.blocks))}
    zv = {bi: solution.block_duals[problem.blocks[bi].label]
          for bi in range(len(problem.blocks))}
    y = solution.y
    tau = solution.tau

    primal: dict = {}
    comp: dict = {}
    for ri, row in enumerate(problem.rows):
        lhs = sum(trace_inner(coeff, bv[bi]) for bi, coeff in row.terms)
        lhs += row.tau_coeff * tau
        scale = 1.0 + abs(row.rhs)
        if row.sense == "eq":
            viol = abs(lhs - row.rhs) / scale
        elif row.sense == "ge":
            viol = max(0.0, row.rhs - lhs) / scale
        else:
            viol = max(0.0, lhs - row.rhs) / scale
        fam = _family(row.label)
        primal[fam] = max(primal.get(fam, 0.0), viol)
        if row.sense != "eq":
            comp[fam] = max(comp.get(fam, 0.0), abs(y[ri] * (lhs - row.rhs)) / scale)

    psd_viol = 0.0
    dual_cone = 0.0
    for bi, spec in enumerate(problem.blocks):
        w = np.linalg.eigvalsh(bv[bi])
        psd_viol = max(psd_viol, -w[0] / (1.0 + abs(w).max()))
        wz = np.linalg.eigvalsh(zv[bi])
        dual_cone = max(dual_cone, -wz[0] / (1.0 + abs(wz).max()))
        comp_b = abs(trace_inner(bv[bi], zv[bi]))
        comp[f"cone:{spec.label}"] = comp_b / (1.0 + abs(w).max())
    primal["psd"] = psd_viol

    dual: dict = {"cone": dual_cone}
    # blockwise stationarity: Z_b must equal -sum_i y_i A_{i,b}
    grad: dict = {bi: -np.array(zv[bi]) for bi in range(len(problem.blocks))}
    tau_grad = 1.0
    for ri, row in enumerate(problem.rows):
        for bi, coeff in row.terms:
            grad[bi] = grad[bi] - y[ri] * coeff
        tau_grad += y[ri] * row.tau_coeff
    for bi, spec in enumerate(problem.blocks):
        # grad = -(Z_b + sum_i y_i A_{i,b}); zero at a stationary point
        dual[f"stat:{spec.label}"] = float(
            np.linalg.norm(grad[bi], "fro") / (1.0 + np.linalg.norm(zv[bi], "fro")))
    dual["stat:tau"] = abs(tau_grad)

    dual_obj = -float(sum(y[ri] * row.rhs for ri, row in enumerate(problem.rows)))
    gap = abs(tau - dual_obj) / (1.0 + abs(tau))
    return KktReport(primal=primal, dual=dual, complementarity=comp, gap=gap,
                     tau=tau, dual_objective=dual_obj)
