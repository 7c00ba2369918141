//! First-order operator-splitting solver for conic programs on the
//! homogeneous self-dual embedding.
//!
//! The iteration is Douglas-Rachford splitting with over-relaxation: a linear
//! solve against `I + Q` (where `Q` packs `A`, `b`, `c` skew-symmetrically),
//! a cone projection, and a running correction. The linear solve reduces to a
//! cached dense Cholesky factor of `I + A'A` plus a Sherman-Morrison rank-one
//! correction. Ruiz equilibration plus scalar normalization of `b` and `c`
//! keep the physics-scale data (channel gains span many decades) workable.
//!
//! Binary-variable fixings enter as appended unit rows so branch-and-bound
//! nodes reuse the base factor through rank-one Cholesky updates.

use super::cones::{proj_dual, ConeTag};
use super::problem::ConicProblem;
use crate::error::Error;
use crate::Result;

#[derive(Debug, Clone)]
pub struct SolveSettings {
    /// Primal/dual feasibility tolerance (relative).
    pub tol_feas: f64,
    /// Relative duality-gap tolerance.
    pub tol_gap: f64,
    /// Infeasibility certificate tolerance.
    pub tol_infeas: f64,
    /// Iteration cap per continuous solve.
    pub max_iter: usize,
    /// Over-relaxation parameter in (0,2).
    pub over_relax: f64,
    /// Convergence check interval.
    pub check_every: usize,
    /// Ruiz equilibration sweeps.
    pub ruiz_iters: usize,
    /// Absolute branch-and-bound gap.
    pub mip_gap: f64,
    /// Branch-and-bound node budget.
    pub mip_node_budget: usize,
    /// Integrality tolerance for binaries.
    pub int_tol: f64,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            tol_feas: 1e-6,
            tol_gap: 1e-6,
            tol_infeas: 1e-9,
            max_iter: 100_000,
            over_relax: 1.5,
            check_every: 25,
            ruiz_iters: 10,
            mip_gap: 1e-6,
            mip_node_budget: 1_000_000,
            int_tol: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Branch-and-bound summary attached to mixed-integer solutions.
#[derive(Debug, Clone, Copy)]
pub struct MipStats {
    pub incumbent: f64,
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub x: Vec<f64>,
    pub status: SolveStatus,
    /// Objective value in the problem's maximize orientation.
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
    pub mip: Option<MipStats>,
    /// Dual/slack estimates used for warm starts (original space).
    pub(crate) y: Vec<f64>,
    pub(crate) s: Vec<f64>,
}

/// Warm-start point in original problem space; `y`/`s` cover the base rows
/// followed by one entry per fixing.
#[derive(Debug, Clone, Default)]
pub struct WarmStart {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
}

// ---------------------------------------------------------------------------
// dense Cholesky with rank-one updates
// ---------------------------------------------------------------------------

fn cholesky_in_place(a: &mut [f64], n: usize) -> Result<()> {
    for k in 0..n {
        let mut d = a[k * n + k];
        for p in 0..k {
            d -= a[k * n + p] * a[k * n + p];
        }
        if d <= 0.0 {
            return Err(Error::Conic("cholesky: matrix not positive definite".into()));
        }
        let dk = d.sqrt();
        a[k * n + k] = dk;
        for i in (k + 1)..n {
            let mut v = a[i * n + k];
            let (rowi, rowk) = (i * n, k * n);
            for p in 0..k {
                v -= a[rowi + p] * a[rowk + p];
            }
            a[i * n + k] = v / dk;
        }
    }
    // zero the strict upper triangle so updates can assume clean storage
    for i in 0..n {
        for j in (i + 1)..n {
            a[i * n + j] = 0.0;
        }
    }
    Ok(())
}

/// Rank-one Cholesky update: factor of `L L' + w w'`, overwriting `l` and `w`.
fn chol_rank1_update(l: &mut [f64], n: usize, w: &mut [f64]) {
    for k in 0..n {
        if w[k] == 0.0 {
            continue;
        }
        let lkk = l[k * n + k];
        let r = (lkk * lkk + w[k] * w[k]).sqrt();
        let c = r / lkk;
        let s = w[k] / lkk;
        l[k * n + k] = r;
        for i in (k + 1)..n {
            let lik = (l[i * n + k] + s * w[i]) / c;
            w[i] = c * w[i] - s * lik;
            l[i * n + k] = lik;
        }
    }
}

fn chol_solve(l: &[f64], n: usize, rhs: &mut [f64]) {
    // forward: L z = rhs
    for i in 0..n {
        let mut v = rhs[i];
        let row = i * n;
        for j in 0..i {
            v -= l[row + j] * rhs[j];
        }
        rhs[i] = v / l[row + i];
    }
    // backward: L' x = z
    for i in (0..n).rev() {
        let mut v = rhs[i];
        for j in (i + 1)..n {
            v -= l[j * n + i] * rhs[j];
        }
        rhs[i] = v / l[i * n + i];
    }
}

// ---------------------------------------------------------------------------
// workspace
// ---------------------------------------------------------------------------

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Prefactored solver state for one problem; reused across warm-started
/// solves and branch-and-bound fixings.
pub struct Workspace<'p> {
    prob: &'p ConicProblem,
    n: usize,
    m: usize,
    /// Equilibrated rows of A.
    arows: Vec<Vec<(usize, f64)>>,
    /// Scaled b and c (minimize orientation).
    b: Vec<f64>,
    c: Vec<f64>,
    /// Row and column scalings: original = D^-1 (scaled) etc.
    d_scale: Vec<f64>,
    e_scale: Vec<f64>,
    sigma_b: f64,
    sigma_c: f64,
    /// Dense lower Cholesky factor of I + A'A (no fixings).
    chol_base: Vec<f64>,
    /// Per-row cone tag (expanded from blocks) for projections.
    row_tags: Vec<(ConeTag, usize, usize)>, // (tag, start, dim)
}

impl<'p> Workspace<'p> {
    /// Number of rows before fixing extensions.
    pub fn base_rows(&self) -> usize {
        self.m
    }

    pub fn new(prob: &'p ConicProblem, settings: &SolveSettings) -> Result<Self> {
        prob.validate()?;
        let n = prob.n_vars();
        let m = prob.n_rows();
        if n == 0 {
            return Err(Error::Conic("problem has no variables".into()));
        }

        let mut arows: Vec<Vec<(usize, f64)>> = prob.rows().to_vec();
        let mut b: Vec<f64> = prob.rhs().to_vec();
        // minimize orientation
        let mut c: Vec<f64> = prob.objective().iter().map(|v| -v).collect();

        // cone block layout
        let mut row_tags = Vec::new();
        let mut off = 0;
        for blk in prob.cones() {
            row_tags.push((blk.tag, off, blk.dim));
            off += blk.dim;
        }

        // quick infeasibility screen on empty rows
        for (tag, start, dim) in &row_tags {
            match tag {
                ConeTag::Zero | ConeTag::NonNeg => {
                    for r in *start..(*start + *dim) {
                        if arows[r].is_empty() {
                            let bad = match tag {
                                ConeTag::Zero => b[r].abs() > 1e-12,
                                _ => b[r] < -1e-12,
                            };
                            if bad {
                                return Err(Error::Infeasible(format!(
                                    "row {r} is empty but rhs {} cannot be satisfied",
                                    b[r]
                                )));
                            }
                        }
                    }
                }
                _ => {}
            }
        }

        // Ruiz equilibration, block-uniform on the rows.
        let mut d_scale = vec![1.0; m];
        let mut e_scale = vec![1.0; n];
        for _ in 0..settings.ruiz_iters {
            let mut row_norm = vec![0.0f64; m];
            let mut col_norm = vec![0.0f64; n];
            for (r, row) in arows.iter().enumerate() {
                for &(cix, v) in row {
                    row_norm[r] = row_norm[r].max(v.abs());
                    col_norm[cix] = col_norm[cix].max(v.abs());
                }
            }
            // uniform scale inside multi-row cone blocks
            let mut row_target = vec![1.0f64; m];
            for (tag, start, dim) in &row_tags {
                match tag {
                    ConeTag::Soc | ConeTag::Exp => {
                        let mx = (*start..(*start + *dim))
                            .map(|r| row_norm[r])
                            .fold(0.0f64, f64::max);
                        let t = if mx > 0.0 { 1.0 / mx.sqrt() } else { 1.0 };
                        for r in *start..(*start + *dim) {
                            row_target[r] = t;
                        }
                    }
                    _ => {
                        for r in *start..(*start + *dim) {
                            row_target[r] = if row_norm[r] > 0.0 {
                                1.0 / row_norm[r].sqrt()
                            } else {
                                1.0
                            };
                        }
                    }
                }
            }
            let col_target: Vec<f64> = col_norm
                .iter()
                .map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 })
                .collect();
            for (r, row) in arows.iter_mut().enumerate() {
                for t in row.iter_mut() {
                    t.1 *= row_target[r] * col_target[t.0];
                }
            }
            for r in 0..m {
                d_scale[r] *= row_target[r];
            }
            for j in 0..n {
                e_scale[j] *= col_target[j];
            }
        }
        for r in 0..m {
            b[r] *= d_scale[r];
        }
        for j in 0..n {
            c[j] *= e_scale[j];
        }
        let sigma_b = norm2(&b).max(1e-4);
        let sigma_c = norm2(&c).max(1e-4);
        for v in &mut b {
            *v /= sigma_b;
        }
        for v in &mut c {
            *v /= sigma_c;
        }

        // dense I + A'A and its Cholesky factor
        let mut gram = vec![0.0f64; n * n];
        for row in &arows {
            for &(j1, v1) in row {
                for &(j2, v2) in row {
                    if j2 <= j1 {
                        gram[j1 * n + j2] += v1 * v2;
                    }
                }
            }
        }
        for j in 0..n {
            gram[j * n + j] += 1.0;
        }
        cholesky_in_place(&mut gram, n)?;

        Ok(Self {
            prob,
            n,
            m,
            arows,
            b,
            c,
            d_scale,
            e_scale,
            sigma_b,
            sigma_c,
            chol_base: gram,
            row_tags,
        })
    }

    fn amul(&self, x: &[f64], out: &mut [f64]) {
        for (r, row) in self.arows.iter().enumerate() {
            let mut acc = 0.0;
            for &(j, v) in row {
                acc += v * x[j];
            }
            out[r] = acc;
        }
    }

    fn atmul(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (r, row) in self.arows.iter().enumerate() {
            let yr = y[r];
            if yr != 0.0 {
                for &(j, v) in row {
                    out[j] += v * yr;
                }
            }
        }
    }

    /// Solves a (possibly fixing-extended) instance.
    ///
    /// `fixings` pins variables to values (original space); `warm` seeds the
    /// iteration from a previous solution with matching fixing count.
    pub fn solve(
        &self,
        fixings: &[(usize, f64)],
        warm: Option<&WarmStart>,
        settings: &SolveSettings,
    ) -> ConicSolution {
        let n = self.n;
        let m = self.m;
        let mf = m + fixings.len();

        // factor: base or base + rank-one updates for fixing rows
        let chol_owned;
        let chol: &[f64] = if fixings.is_empty() {
            &self.chol_base
        } else {
            let mut l = self.chol_base.clone();
            let mut w = vec![0.0f64; n];
            for &(j, _) in fixings {
                w.iter_mut().for_each(|v| *v = 0.0);
                w[j] = 1.0;
                chol_rank1_update(&mut l, n, &mut w);
            }
            chol_owned = l;
            &chol_owned
        };

        // extended scaled rhs
        let mut b_ext = self.b.clone();
        for &(j, val) in fixings {
            b_ext.push(val / (self.e_scale[j] * self.sigma_b));
        }

        // solveM closure: (I + A'A)-backed block solve of
        // [I A'; -A I] (z1, z2) = (r1, r2), A extended by fixing unit rows.
        let solve_m = |r1: &[f64], r2: &[f64]| -> (Vec<f64>, Vec<f64>) {
            let mut t = vec![0.0f64; n];
            self.atmul(&r2[..m], &mut t);
            for (fi, &(j, _)) in fixings.iter().enumerate() {
                t[j] += r2[m + fi];
            }
            for j in 0..n {
                t[j] = r1[j] - t[j];
            }
            chol_solve(chol, n, &mut t);
            let mut z2 = vec![0.0f64; mf];
            self.amul(&t, &mut z2[..m]);
            for (fi, &(j, _)) in fixings.iter().enumerate() {
                z2[m + fi] = t[j];
            }
            for r in 0..mf {
                z2[r] += r2[r];
            }
            (t, z2)
        };

        // Sherman-Morrison data for the tau row/column
        let (g1, g2) = solve_m(&self.c, &b_ext);
        let sm_denom = 1.0 + dot(&self.c, &g1) + dot(&b_ext, &g2);

        // iterate storage: u = (x, y, tau), v = (0?, s, kappa)
        let nn = n + mf + 1;
        let mut u = vec![0.0f64; nn];
        let mut v = vec![0.0f64; nn];
        u[nn - 1] = 1.0;
        v[nn - 1] = 1.0;
        if let Some(wrm) = warm {
            if wrm.x.len() == n && wrm.y.len() == mf && wrm.s.len() == mf {
                for j in 0..n {
                    u[j] = wrm.x[j] / (self.e_scale[j] * self.sigma_b);
                }
                for r in 0..mf {
                    let d = if r < m { self.d_scale[r] } else { 1.0 / self.e_scale[fixings[r - m].0] };
                    u[n + r] = wrm.y[r] / (d * self.sigma_c);
                    v[n + r] = wrm.s[r] * d / self.sigma_b;
                }
                v[nn - 1] = 0.0;
            }
        }

        let alpha = settings.over_relax;
        let mut wbuf = vec![0.0f64; nn];
        let mut ut = vec![0.0f64; nn];
        let mut best: Option<ConicSolution> = None;
        let mut iterations = 0;

        for iter in 1..=settings.max_iter {
            iterations = iter;
            // w = u + v
            for i in 0..nn {
                wbuf[i] = u[i] + v[i];
            }
            // ut = (I + Q)^{-1} w
            {
                let w3 = wbuf[nn - 1];
                let mut r1 = vec![0.0f64; n];
                let mut r2 = vec![0.0f64; mf];
                for j in 0..n {
                    r1[j] = wbuf[j] - self.c[j] * w3;
                }
                for r in 0..mf {
                    r2[r] = wbuf[n + r] - b_ext[r] * w3;
                }
                let (p1, p2) = solve_m(&r1, &r2);
                let beta = (dot(&self.c, &p1) + dot(&b_ext, &p2)) / sm_denom;
                for j in 0..n {
                    ut[j] = p1[j] - beta * g1[j];
                }
                for r in 0..mf {
                    ut[n + r] = p2[r] - beta * g2[r];
                }
                ut[nn - 1] = w3 + dot(&self.c, &ut[..n]) + dot(&b_ext, &ut[n..n + mf]);
            }
            // relaxed step p = alpha*ut + (1-alpha)*u; q = p - v; u = proj_C(q)
            for i in 0..nn {
                let p = alpha * ut[i] + (1.0 - alpha) * u[i];
                wbuf[i] = p; // reuse wbuf to hold p
            }
            let mut unew = vec![0.0f64; nn];
            for i in 0..nn {
                unew[i] = wbuf[i] - v[i];
            }
            // x free; y onto dual cones; fixing rows are zero-cone -> dual free
            for (tag, start, dim) in &self.row_tags {
                proj_dual(*tag, &mut unew[n + start..n + start + dim]);
            }
            // tau >= 0
            if unew[nn - 1] < 0.0 {
                unew[nn - 1] = 0.0;
            }
            // v += unew - p
            for i in 0..nn {
                v[i] += unew[i] - wbuf[i];
            }
            u = unew;

            let last = iter == settings.max_iter;
            if iter % settings.check_every == 0 || last {
                let tau = u[nn - 1];
                if tau > 1e-9 {
                    let sol = self.extract(&u, &v, fixings, &b_ext, tau, iter);
                    let ok = sol.primal_residual <= settings.tol_feas
                        && sol.dual_residual <= settings.tol_feas
                        && sol.gap <= settings.tol_gap;
                    if ok {
                        return sol;
                    }
                    let better = best
                        .as_ref()
                        .map(|b| {
                            sol.primal_residual + sol.dual_residual + sol.gap
                                < b.primal_residual + b.dual_residual + b.gap
                        })
                        .unwrap_or(true);
                    if better {
                        best = Some(sol);
                    }
                }
                // infeasibility certificates only once tau has collapsed
                if u[nn - 1] > 1e-7 {
                    continue;
                }
                let by = dot(&b_ext, &u[n..n + mf]);
                if by < -1e-12 {
                    let mut aty = vec![0.0f64; n];
                    self.atmul(&u[n..n + m], &mut aty);
                    for (fi, &(j, _)) in fixings.iter().enumerate() {
                        aty[j] += u[n + m + fi];
                    }
                    if norm2(&aty) / (-by) <= settings.tol_infeas * 1e3 {
                        return self.cert_solution(SolveStatus::Infeasible, iter);
                    }
                }
                let cx = dot(&self.c, &u[..n]);
                if cx < -1e-12 {
                    let mut ax = vec![0.0f64; mf];
                    self.amul(&u[..n], &mut ax[..m]);
                    for (fi, &(j, _)) in fixings.iter().enumerate() {
                        ax[m + fi] = u[j];
                    }
                    for r in 0..mf {
                        ax[r] += v[n + r];
                    }
                    if norm2(&ax) / (-cx) <= settings.tol_infeas * 1e3 {
                        return self.cert_solution(SolveStatus::Unbounded, iter);
                    }
                }
            }
        }

        let mut sol = best.unwrap_or_else(|| self.cert_solution(SolveStatus::IterationLimit, iterations));
        sol.status = SolveStatus::IterationLimit;
        sol.iterations = iterations;
        sol
    }

    fn cert_solution(&self, status: SolveStatus, iterations: usize) -> ConicSolution {
        ConicSolution {
            x: vec![0.0; self.n],
            status,
            objective: 0.0,
            primal_residual: f64::INFINITY,
            dual_residual: f64::INFINITY,
            gap: f64::INFINITY,
            iterations,
            mip: None,
            y: vec![],
            s: vec![],
        }
    }

    /// Unscales the current iterate and evaluates original-space residuals.
    fn extract(
        &self,
        u: &[f64],
        v: &[f64],
        fixings: &[(usize, f64)],
        _b_ext: &[f64],
        tau: f64,
        iterations: usize,
    ) -> ConicSolution {
        let n = self.n;
        let m = self.m;
        let mf = m + fixings.len();
        let mut x = vec![0.0f64; n];
        for j in 0..n {
            x[j] = u[j] / tau * self.e_scale[j] * self.sigma_b;
        }
        let mut y = vec![0.0f64; mf];
        let mut s = vec![0.0f64; mf];
        for r in 0..mf {
            let d = if r < m {
                self.d_scale[r]
            } else {
                1.0 / self.e_scale[fixings[r - m].0]
            };
            y[r] = u[n + r] / tau * d * self.sigma_c;
            s[r] = v[n + r] / tau / d * self.sigma_b;
        }

        // original-space residuals (fixing rows included)
        let orig_rows = self.prob.rows();
        let orig_b = self.prob.rhs();
        let cmax = self.prob.objective();
        let mut pres = 0.0f64;
        let mut bty = 0.0f64;
        let mut bnorm2 = 0.0f64;
        for r in 0..m {
            let mut ax = 0.0;
            for &(j, vv) in &orig_rows[r] {
                ax += vv * x[j];
            }
            let res = ax + s[r] - orig_b[r];
            pres += res * res;
            bty += orig_b[r] * y[r];
            bnorm2 += orig_b[r] * orig_b[r];
        }
        for (fi, &(j, val)) in fixings.iter().enumerate() {
            let res = x[j] + s[m + fi] - val;
            pres += res * res;
            bty += val * y[m + fi];
            bnorm2 += val * val;
        }
        let pres = pres.sqrt() / (1.0 + bnorm2.sqrt());

        let mut aty = vec![0.0f64; n];
        for r in 0..m {
            let yr = y[r];
            if yr != 0.0 {
                for &(j, vv) in &orig_rows[r] {
                    aty[j] += vv * yr;
                }
            }
        }
        for (fi, &(j, _)) in fixings.iter().enumerate() {
            aty[j] += y[m + fi];
        }
        let mut dres = 0.0f64;
        let mut cnorm2 = 0.0f64;
        let mut ctx = 0.0f64;
        for j in 0..n {
            let cmin = -cmax[j];
            let res = aty[j] + cmin;
            dres += res * res;
            cnorm2 += cmin * cmin;
            ctx += cmin * x[j];
        }
        let dres = dres.sqrt() / (1.0 + cnorm2.sqrt());
        let gap = (ctx + bty).abs() / (1.0 + ctx.abs() + bty.abs());

        ConicSolution {
            objective: self.prob.objective_value(&x),
            x,
            status: SolveStatus::Optimal,
            primal_residual: pres,
            dual_residual: dres,
            gap,
            iterations,
            mip: None,
            y,
            s,
        }
    }
}

/// Solves the continuous relaxation (binaries treated as boxed reals).
pub fn solve_continuous(prob: &ConicProblem, settings: &SolveSettings) -> Result<ConicSolution> {
    let ws = Workspace::new(prob, settings)?;
    Ok(ws.solve(&[], None, settings))
}
