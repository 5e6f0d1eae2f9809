//! Convex QP solver for
//!
//! ```text
//! minimize    1/2 x'Px + q'x
//! subject to  l <= Ax <= u
//! ```
//!
//! using operator-splitting ADMM with over-relaxation, Ruiz equilibration,
//! adaptive step size and active-set polishing. Rows with `l == u` are
//! equalities. Infinite bounds are allowed.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QpSettings {
    pub rho: f64,
    pub sigma: f64,
    /// Over-relaxation parameter in (0, 2).
    pub alpha: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub eps_infeasible: f64,
    pub max_iter: usize,
    pub check_every: usize,
    pub adaptive_rho: bool,
    pub adaptive_rho_interval: usize,
    /// Step-size multiplier for equality rows.
    pub eq_rho_scale: f64,
    pub scaling_iter: usize,
    pub polish: bool,
    pub max_polish_iter: usize,
    /// Try the equality-constrained minimizer first and accept it when it
    /// already satisfies every inequality.
    pub fast_path: bool,
    pub warm_start: bool,
}

impl Default for QpSettings {
    fn default() -> Self {
        Self {
            rho: 0.1,
            sigma: 1e-6,
            alpha: 1.6,
            eps_abs: 1e-8,
            eps_rel: 1e-8,
            eps_infeasible: 1e-7,
            max_iter: 20_000,
            check_every: 10,
            adaptive_rho: true,
            adaptive_rho_interval: 50,
            eq_rho_scale: 1e3,
            scaling_iter: 10,
            polish: true,
            max_polish_iter: 30,
            fast_path: true,
            warm_start: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Solved,
    /// Iteration limit reached; the best iterate is returned.
    MaxIterations,
    PrimalInfeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpMethod {
    FastPath,
    Admm,
    Polished,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: DVector<f64>,
    /// Constraint multipliers: positive on active upper bounds, negative on
    /// active lower bounds.
    pub y: DVector<f64>,
    pub status: QpStatus,
    pub method: QpMethod,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub objective: f64,
}

impl QpSolution {
    pub fn is_solved(&self) -> bool {
        self.status == QpStatus::Solved
    }
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.amax()
}

fn col_inf_norm(m: &DMatrix<f64>, j: usize) -> f64 {
    m.column(j).amax()
}

fn row_inf_norm(m: &DMatrix<f64>, i: usize) -> f64 {
    m.row(i).amax()
}

/// Ruiz equilibration: the scaled data are `c D P D`, `c D q`, `E A D`,
/// `E l`, `E u`.
#[derive(Debug, Clone)]
struct Scaling {
    d: DVector<f64>,
    e: DVector<f64>,
    c: f64,
}

impl Scaling {
    fn compute(p: &DMatrix<f64>, a: &DMatrix<f64>, iters: usize) -> (Self, DMatrix<f64>, DMatrix<f64>) {
        let n = p.nrows();
        let m = a.nrows();
        let mut d = DVector::from_element(n, 1.0);
        let mut e = DVector::from_element(m, 1.0);
        let mut ps = p.clone();
        let mut as_ = a.clone();
        let clamp = |v: f64| if v < 1e-4 { 1.0 } else { v.min(1e4) };
        for _ in 0..iters {
            let dd = DVector::from_fn(n, |j, _| {
                1.0 / clamp(col_inf_norm(&ps, j).max(col_inf_norm(&as_, j))).sqrt()
            });
            let de = DVector::from_fn(m, |i, _| 1.0 / clamp(row_inf_norm(&as_, i)).sqrt());
            for j in 0..n {
                for i in 0..n {
                    ps[(i, j)] *= dd[i] * dd[j];
                }
                for i in 0..m {
                    as_[(i, j)] *= de[i] * dd[j];
                }
            }
            d.component_mul_assign(&dd);
            e.component_mul_assign(&de);
        }
        let mean_col = if n > 0 {
            (0..n).map(|j| col_inf_norm(&ps, j)).sum::<f64>() / n as f64
        } else {
            1.0
        };
        let c = 1.0 / clamp(mean_col);
        ps *= c;
        (Self { d, e, c }, ps, as_)
    }
}

/// Reusable solver for a fixed `(P, A)` with changing `q`, `l`, `u`.
/// Keeps factorizations and the last iterate for warm starting.
#[derive(Debug, Clone)]
pub struct QpSolver {
    settings: QpSettings,
    p: DMatrix<f64>,
    a: DMatrix<f64>,
    scaling: Scaling,
    ps: DMatrix<f64>,
    as_: DMatrix<f64>,
    rho_base: f64,
    eq_pattern: Vec<bool>,
    kkt_chol: Option<Cholesky<f64, Dyn>>,
    eq_kkt: Option<Option<LU<f64, Dyn, Dyn>>>,
    warm: Option<(DVector<f64>, DVector<f64>, DVector<f64>)>,
}

impl QpSolver {
    pub fn new(p: DMatrix<f64>, a: DMatrix<f64>, settings: QpSettings) -> Result<Self> {
        let n = p.nrows();
        if p.ncols() != n || a.ncols() != n {
            return Err(Error::Dimension(format!(
                "P is {}x{}, A is {}x{}",
                p.nrows(),
                p.ncols(),
                a.nrows(),
                a.ncols()
            )));
        }
        if p.iter().chain(a.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Dimension("P and A must be finite".into()));
        }
        let p = (&p + p.transpose()) * 0.5;
        let (scaling, ps, as_) = Scaling::compute(&p, &a, settings.scaling_iter);
        let rho_base = settings.rho;
        Ok(Self {
            settings,
            p,
            a,
            scaling,
            ps,
            as_,
            rho_base,
            eq_pattern: Vec::new(),
            kkt_chol: None,
            eq_kkt: None,
            warm: None,
        })
    }

    pub fn settings(&self) -> &QpSettings {
        &self.settings
    }

    pub fn n(&self) -> usize {
        self.p.nrows()
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn reset_warm_start(&mut self) {
        self.warm = None;
    }

    fn rho_vec(&self) -> DVector<f64> {
        DVector::from_fn(self.m(), |i, _| {
            if self.eq_pattern[i] {
                self.rho_base * self.settings.eq_rho_scale
            } else {
                self.rho_base
            }
        })
    }

    fn factor(&mut self) -> Result<()> {
        let rho = self.rho_vec();
        let n = self.n();
        let mut k = self.ps.clone();
        for i in 0..n {
            k[(i, i)] += self.settings.sigma;
        }
        let ar = DMatrix::from_fn(self.m(), n, |i, j| self.as_[(i, j)] * rho[i]);
        k += self.as_.transpose() * ar;
        self.kkt_chol = Some(Cholesky::new(k).ok_or_else(|| {
            Error::Dimension("reduced KKT matrix is not positive definite (is P PSD?)".into())
        })?);
        Ok(())
    }

    /// LU of `[P A_eq'; A_eq 0]` in unscaled data, built lazily.
    fn eq_kkt(&mut self) -> Option<&LU<f64, Dyn, Dyn>> {
        if self.eq_kkt.is_none() {
            let rows: Vec<usize> = (0..self.m()).filter(|&i| self.eq_pattern[i]).collect();
            let n = self.n();
            let k = rows.len();
            let mut kkt = DMatrix::zeros(n + k, n + k);
            kkt.view_mut((0, 0), (n, n)).copy_from(&self.p);
            for (r, &i) in rows.iter().enumerate() {
                for j in 0..n {
                    kkt[(n + r, j)] = self.a[(i, j)];
                    kkt[(j, n + r)] = self.a[(i, j)];
                }
            }
            let lu = LU::new(kkt);
            let ok = lu.is_invertible();
            self.eq_kkt = Some(ok.then_some(lu));
        }
        self.eq_kkt.as_ref().and_then(|o| o.as_ref())
    }

    fn objective(&self, q: &DVector<f64>, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.p * x)) + q.dot(x)
    }

    /// Unscaled primal and dual residuals.
    fn residuals(&self, q: &DVector<f64>, x: &DVector<f64>, z: &DVector<f64>, y: &DVector<f64>) -> (f64, f64) {
        let prim = inf_norm(&(&self.a * x - z));
        let dual = inf_norm(&(&self.p * x + q + self.a.transpose() * y));
        (prim, dual)
    }

    /// Magnitudes the primal and dual residuals are measured against.
    fn residual_norms(&self, q: &DVector<f64>, x: &DVector<f64>, z: &DVector<f64>, y: &DVector<f64>) -> (f64, f64) {
        let ax = inf_norm(&(&self.a * x));
        let px = inf_norm(&(&self.p * x));
        let aty = inf_norm(&(self.a.transpose() * y));
        (ax.max(inf_norm(z)), px.max(aty).max(inf_norm(q)))
    }

    fn tolerances(&self, q: &DVector<f64>, x: &DVector<f64>, z: &DVector<f64>, y: &DVector<f64>) -> (f64, f64) {
        let s = &self.settings;
        let (np, nd) = self.residual_norms(q, x, z, y);
        (s.eps_abs + s.eps_rel * np, s.eps_abs + s.eps_rel * nd)
    }

    fn check_inputs(&self, q: &DVector<f64>, l: &DVector<f64>, u: &DVector<f64>) -> Result<()> {
        if q.len() != self.n() || l.len() != self.m() || u.len() != self.m() {
            return Err(Error::Dimension(format!(
                "expected q of {} and bounds of {}, got {}, {}, {}",
                self.n(),
                self.m(),
                q.len(),
                l.len(),
                u.len()
            )));
        }
        if q.iter().any(|v| !v.is_finite()) || l.iter().chain(u.iter()).any(|v| v.is_nan()) {
            return Err(Error::Dimension("q must be finite and bounds not NaN".into()));
        }
        if l.iter().zip(u.iter()).any(|(lo, hi)| lo > hi) {
            return Err(Error::Infeasible);
        }
        Ok(())
    }

    pub fn solve(&mut self, q: &DVector<f64>, l: &DVector<f64>, u: &DVector<f64>) -> Result<QpSolution> {
        self.check_inputs(q, l, u)?;
        let pattern: Vec<bool> = l.iter().zip(u.iter()).map(|(a, b)| a == b).collect();
        if pattern != self.eq_pattern || self.kkt_chol.is_none() {
            self.eq_pattern = pattern;
            self.rho_base = self.settings.rho;
            self.eq_kkt = None;
            self.warm = None;
            self.factor()?;
        }
        if self.settings.fast_path {
            if let Some(sol) = self.try_fast_path(q, l, u) {
                return Ok(sol);
            }
        }
        self.admm(q, l, u)
    }

    fn feasible(&self, ax: &DVector<f64>, l: &DVector<f64>, u: &DVector<f64>, tol: f64) -> bool {
        (0..ax.len()).all(|i| {
            let t = tol * (1.0 + ax[i].abs());
            ax[i] >= l[i] - t && ax[i] <= u[i] + t
        })
    }

    fn try_fast_path(&mut self, q: &DVector<f64>, l: &DVector<f64>, u: &DVector<f64>) -> Option<QpSolution> {
        let n = self.n();
        let rows: Vec<usize> = (0..self.m()).filter(|&i| self.eq_pattern[i]).collect();
        let mut rhs = DVector::zeros(n + rows.len());
        rhs.rows_mut(0, n).copy_from(&(-q));
        for (r, &i) in rows.iter().enumerate() {
            rhs[n + r] = l[i];
        }
        let sol = self.eq_kkt()?.solve(&rhs)?;
        let x = sol.rows(0, n).into_owned();
        let ax = &self.a * &x;
        if !self.feasible(&ax, l, u, 1e-10) {
            return None;
        }
        let mut y = DVector::zeros(self.m());
        for (r, &i) in rows.iter().enumerate() {
            y[i] = sol[n + r];
        }
        let z = ax.zip_zip_map(l, u, |v, lo, hi| v.clamp(lo, hi));
        let (prim, dual) = self.residuals(q, &x, &z, &y);
        if !prim.is_finite() || !dual.is_finite() {
            return None;
        }
        let objective = self.objective(q, &x);
        self.store_warm(&x, &z, &y);
        Some(QpSolution {
            x,
            y,
            status: QpStatus::Solved,
            method: QpMethod::FastPath,
            iterations: 0,
            primal_residual: prim,
            dual_residual: dual,
            objective,
        })
    }

    fn store_warm(&mut self, x: &DVector<f64>, z: &DVector<f64>, y: &DVector<f64>) {
        if !self.settings.warm_start {
            return;
        }
        let sc = &self.scaling;
        let xs = x.component_div(&sc.d);
        let zs = z.component_mul(&sc.e);
        let ys = y.component_div(&sc.e) * sc.c;
        self.warm = Some((xs, zs, ys));
    }

    fn admm(&mut self, q: &DVector<f64>, l: &DVector<f64>, u: &DVector<f64>) -> Result<QpSolution> {
        let n = self.n();
        let m = self.m();
        let sc = self.scaling.clone();
        let qs = q.component_mul(&sc.d) * sc.c;
        let ls = l.component_mul(&sc.e);
        let us = u.component_mul(&sc.e);
        let (mut x, mut z, mut y) = match &self.warm {
            Some((x, z, y)) if self.settings.warm_start => (x.clone(), z.clone(), y.clone()),
            _ => (DVector::zeros(n), DVector::zeros(m), DVector::zeros(m)),
        };
        z = z.zip_zip_map(&ls, &us, |v, lo, hi| v.clamp(lo, hi));
        let mut rho = self.rho_vec();
        let sigma = self.settings.sigma;
        let alpha = self.settings.alpha;
        let unscale = |x: &DVector<f64>, z: &DVector<f64>, y: &DVector<f64>| {
            (
                x.component_mul(&sc.d),
                z.component_div(&sc.e),
                y.component_mul(&sc.e) / sc.c,
            )
        };
        let mut next_polish = 0;
        let mut best: Option<QpSolution> = None;
        let mut y_prev = y.clone();
        let max_iter = self.settings.max_iter;
        let check = self.settings.check_every.max(1);
        for it in 1..=max_iter {
            let rhs = &x * sigma - &qs + self.as_.transpose() * (rho.component_mul(&z) - &y);
            let x_tilde = self.kkt_chol.as_ref().expect("factorized").solve(&rhs);
            let z_tilde = &self.as_ * &x_tilde;
            let x_next = &x_tilde * alpha + &x * (1.0 - alpha);
            let z_relaxed = &z_tilde * alpha + &z * (1.0 - alpha);
            let z_next = (&z_relaxed + y.component_div(&rho)).zip_zip_map(&ls, &us, |v, lo, hi| v.clamp(lo, hi));
            let y_next = &y + rho.component_mul(&(&z_relaxed - &z_next));
            x = x_next;
            z = z_next;
            std::mem::swap(&mut y_prev, &mut y);
            y = y_next;

            if it % check != 0 && it != max_iter {
                continue;
            }
            let (xu, zu, yu) = unscale(&x, &z, &y);
            let (prim, dual) = self.residuals(q, &xu, &zu, &yu);
            let (eps_p, eps_d) = self.tolerances(q, &xu, &zu, &yu);
            let candidate = QpSolution {
                objective: self.objective(q, &xu),
                x: xu.clone(),
                y: yu.clone(),
                status: QpStatus::MaxIterations,
                method: QpMethod::Admm,
                iterations: it,
                primal_residual: prim,
                dual_residual: dual,
            };
            if prim <= eps_p && dual <= eps_d {
                self.warm = Some((x.clone(), z.clone(), y.clone()));
                return Ok(QpSolution {
                    status: QpStatus::Solved,
                    ..candidate
                });
            }
            if self.primal_infeasible(&(&y - &y_prev), &ls, &us) {
                self.warm = None;
                return Ok(QpSolution {
                    status: QpStatus::PrimalInfeasible,
                    ..candidate
                });
            }
            let (np, nd) = self.residual_norms(q, &xu, &zu, &yu);
            let near = prim <= 1e-4 * (1.0 + np) && dual <= 1e-4 * (1.0 + nd);
            if self.settings.polish && it >= next_polish && near {
                if let Some(sol) = self.polish(q, l, u, &xu, &zu, &yu, it) {
                    self.store_warm(&sol.x, &(&self.a * &sol.x), &sol.y);
                    return Ok(sol);
                }
                next_polish = it + 10 * self.settings.adaptive_rho_interval;
            }
            if best
                .as_ref()
                .is_none_or(|b| prim.max(dual) < b.primal_residual.max(b.dual_residual))
            {
                best = Some(candidate);
            }
            if self.settings.adaptive_rho && it % self.settings.adaptive_rho_interval == 0 {
                let ax = inf_norm(&(&self.as_ * &x));
                let ps_x = inf_norm(&(&self.ps * &x));
                let aty = inf_norm(&(self.as_.transpose() * &y));
                let prim_s = inf_norm(&(&self.as_ * &x - &z)) / ax.max(inf_norm(&z)).max(1e-30);
                let dual_s = inf_norm(&(&self.ps * &x + &qs + self.as_.transpose() * &y))
                    / ps_x.max(aty).max(inf_norm(&qs)).max(1e-30);
                let ratio = (prim_s / dual_s.max(1e-30)).sqrt();
                if ratio > 5.0 || ratio < 0.2 {
                    self.rho_base = (self.rho_base * ratio).clamp(1e-6, 1e6);
                    self.factor()?;
                    rho = self.rho_vec();
                }
            }
        }
        let mut sol = best.expect("at least one residual check");
        if self.settings.polish {
            let (xu, zu, yu) = unscale(&x, &z, &y);
            if let Some(p) = self.polish(q, l, u, &xu, &zu, &yu, max_iter) {
                self.store_warm(&p.x, &(&self.a * &p.x), &p.y);
                return Ok(p);
            }
        }
        sol.status = QpStatus::MaxIterations;
        self.warm = Some((x, z, y));
        Ok(sol)
    }

    /// Farkas-type certificate on the scaled dual increment.
    fn primal_infeasible(&self, dy: &DVector<f64>, ls: &DVector<f64>, us: &DVector<f64>) -> bool {
        let norm = inf_norm(dy);
        if norm < 1e-30 {
            return false;
        }
        let eps = self.settings.eps_infeasible;
        let aty = inf_norm(&(self.as_.transpose() * dy));
        if aty > eps * norm {
            return false;
        }
        let mut support = 0.0;
        for i in 0..dy.len() {
            let v = dy[i];
            if v > 0.0 {
                if us[i].is_infinite() {
                    return false;
                }
                support += us[i] * v;
            } else if v < 0.0 {
                if ls[i].is_infinite() {
                    return false;
                }
                support += ls[i] * v;
            }
        }
        support < -eps * norm
    }

    /// Solves the equality-constrained problem on a guessed active set and
    /// refines the guess until primal and dual feasibility hold.
    #[allow(clippy::too_many_arguments)]
    fn polish(
        &self,
        q: &DVector<f64>,
        l: &DVector<f64>,
        u: &DVector<f64>,
        x: &DVector<f64>,
        z: &DVector<f64>,
        y: &DVector<f64>,
        iterations: usize,
    ) -> Option<QpSolution> {
        #[derive(Clone, Copy, PartialEq)]
        enum Act {
            Free,
            Lower,
            Upper,
        }
        let m = self.m();
        let n = self.n();
        let rho = self.rho_base;
        let mut act: Vec<Act> = (0..m)
            .map(|i| {
                if self.eq_pattern[i] {
                    Act::Lower
                } else if z[i] - l[i] < -y[i] / rho && l[i].is_finite() {
                    Act::Lower
                } else if u[i] - z[i] < y[i] / rho && u[i].is_finite() {
                    Act::Upper
                } else {
                    Act::Free
                }
            })
            .collect();
        let _ = x;
        let scale = |v: f64| 1e-9 * (1.0 + v.abs());
        for _ in 0..self.settings.max_polish_iter {
            let rows: Vec<usize> = (0..m).filter(|&i| act[i] != Act::Free).collect();
            let k = rows.len();
            let mut kkt = DMatrix::zeros(n + k, n + k);
            kkt.view_mut((0, 0), (n, n)).copy_from(&self.p);
            let mut rhs = DVector::zeros(n + k);
            rhs.rows_mut(0, n).copy_from(&(-q));
            for (r, &i) in rows.iter().enumerate() {
                for j in 0..n {
                    kkt[(n + r, j)] = self.a[(i, j)];
                    kkt[(j, n + r)] = self.a[(i, j)];
                }
                rhs[n + r] = if act[i] == Act::Upper { u[i] } else { l[i] };
            }
            let sol = solve_kkt(&kkt, &rhs, n)?;
            let xs = sol.rows(0, n).into_owned();
            let mut ys = DVector::zeros(m);
            for (r, &i) in rows.iter().enumerate() {
                ys[i] = sol[n + r];
            }
            let ax = &self.a * &xs;
            // most violated inactive constraint
            let mut worst_p: Option<(usize, f64, Act)> = None;
            for i in 0..m {
                if act[i] != Act::Free {
                    continue;
                }
                let (viol, side) = if ax[i] < l[i] - scale(l[i]) {
                    (l[i] - ax[i], Act::Lower)
                } else if ax[i] > u[i] + scale(u[i]) {
                    (ax[i] - u[i], Act::Upper)
                } else {
                    continue;
                };
                if worst_p.is_none_or(|(_, v, _)| viol > v) {
                    worst_p = Some((i, viol, side));
                }
            }
            if let Some((i, _, side)) = worst_p {
                act[i] = side;
                continue;
            }
            // most wrong-signed multiplier among inequality rows
            let ymax = inf_norm(&ys).max(1.0);
            let mut worst_d: Option<(usize, f64)> = None;
            for i in 0..m {
                if self.eq_pattern[i] {
                    continue;
                }
                let wrong = match act[i] {
                    Act::Lower => ys[i],
                    Act::Upper => -ys[i],
                    Act::Free => continue,
                };
                if wrong > 1e-10 * ymax && worst_d.is_none_or(|(_, v)| wrong > v) {
                    worst_d = Some((i, wrong));
                }
            }
            if let Some((i, _)) = worst_d {
                act[i] = Act::Free;
                continue;
            }
            let zs = ax.zip_zip_map(l, u, |v, lo, hi| v.clamp(lo, hi));
            let (prim, dual) = self.residuals(q, &xs, &zs, &ys);
            let (eps_p, eps_d) = self.tolerances(q, &xs, &zs, &ys);
            if prim > 1e3 * eps_p.max(1e-9) || dual > 1e3 * eps_d.max(1e-9) {
                return None;
            }
            return Some(QpSolution {
                objective: self.objective(q, &xs),
                x: xs,
                y: ys,
                status: QpStatus::Solved,
                method: QpMethod::Polished,
                iterations,
                primal_residual: prim,
                dual_residual: dual,
            });
        }
        None
    }
}

/// Solves a KKT system, falling back to a regularized solve with iterative
/// refinement when the active rows are dependent.
fn solve_kkt(kkt: &DMatrix<f64>, rhs: &DVector<f64>, n: usize) -> Option<DVector<f64>> {
    let lu = LU::new(kkt.clone());
    if let Some(s) = lu.solve(rhs) {
        if s.iter().all(|v| v.is_finite()) {
            let mut s = s;
            // one step of refinement
            let r = rhs - kkt * &s;
            if let Some(ds) = lu.solve(&r) {
                s += ds;
            }
            return Some(s);
        }
    }
    let delta = 1e-10 * kkt.amax().max(1.0);
    let mut reg = kkt.clone();
    for i in 0..reg.nrows() {
        reg[(i, i)] += if i < n { delta } else { -delta };
    }
    let lu = LU::new(reg);
    let mut s = lu.solve(rhs)?;
    for _ in 0..10 {
        let r = rhs - kkt * &s;
        s += lu.solve(&r)?;
    }
    s.iter().all(|v| v.is_finite()).then_some(s)
}

/// One-shot convenience wrapper: equality rows `A_eq x = b_eq` and boxes
/// `l_box <= A_box x <= u_box`.
pub fn qp_solve(
    p: &DMatrix<f64>,
    q: &DVector<f64>,
    a_eq: &DMatrix<f64>,
    b_eq: &DVector<f64>,
    a_box: &DMatrix<f64>,
    l_box: &DVector<f64>,
    u_box: &DVector<f64>,
    settings: QpSettings,
) -> Result<QpSolution> {
    let n = p.nrows();
    let me = a_eq.nrows();
    let mb = a_box.nrows();
    if (me > 0 && a_eq.ncols() != n) || (mb > 0 && a_box.ncols() != n) || b_eq.len() != me {
        return Err(Error::Dimension("constraint blocks do not match P".into()));
    }
    let mut a = DMatrix::zeros(me + mb, n);
    if me > 0 {
        a.rows_mut(0, me).copy_from(a_eq);
    }
    if mb > 0 {
        a.rows_mut(me, mb).copy_from(a_box);
    }
    let mut l = DVector::zeros(me + mb);
    let mut u = DVector::zeros(me + mb);
    l.rows_mut(0, me).copy_from(b_eq);
    u.rows_mut(0, me).copy_from(b_eq);
    l.rows_mut(me, mb).copy_from(l_box);
    u.rows_mut(me, mb).copy_from(u_box);
    QpSolver::new(p.clone(), a, settings)?.solve(q, &l, &u)
}
