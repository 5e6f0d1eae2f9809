#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Discrete LTI system `x+ = A x + B u`, `y = C x + D u`.
pub struct Lti {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl Lti {
    /// Stable third-order SISO plant with a lightly damped pair.
    pub fn siso() -> Self {
        Self {
            a: DMatrix::from_row_slice(3, 3, &[0.95, 0.2, 0.0, -0.2, 0.95, 0.1, 0.0, 0.0, 0.7]),
            b: DMatrix::from_column_slice(3, 1, &[0.0, 0.1, 1.0]),
            c: DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.5]),
            d: DMatrix::zeros(1, 1),
        }
    }

    /// Two inputs, two outputs, four states.
    pub fn mimo() -> Self {
        Self {
            a: DMatrix::from_row_slice(
                4,
                4,
                &[0.9, 0.1, 0.0, 0.0, 0.0, 0.8, 0.2, 0.0, 0.0, 0.0, 0.85, 0.1, 0.05, 0.0, 0.0, 0.6],
            ),
            b: DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 0.5, 0.2, 0.0, 0.0, 1.0]),
            c: DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.3]),
            d: DMatrix::zeros(2, 2),
        }
    }

    /// Sampled double integrator, position measured, `h = 0.1`.
    pub fn double_integrator() -> Self {
        let h = 0.1;
        Self {
            a: DMatrix::from_row_slice(2, 2, &[1.0, h, 0.0, 1.0]),
            b: DMatrix::from_column_slice(2, 1, &[h * h / 2.0, h]),
            c: DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            d: DMatrix::zeros(1, 1),
        }
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Simulates from `x0` under `u` (`T x m`); returns `(y, x_final)` with
    /// `y` as `T x p`.
    pub fn rollout(&self, x0: &DVector<f64>, u: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
        let mut x = x0.clone();
        let mut y = DMatrix::zeros(u.nrows(), self.c.nrows());
        for k in 0..u.nrows() {
            let uk = u.row(k).transpose();
            let yk = &self.c * &x + &self.d * &uk;
            y.row_mut(k).copy_from(&yk.transpose());
            x = &self.a * &x + &self.b * &uk;
        }
        (y, x)
    }
}

pub fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stacks the rows of a `T x d` sequence into one vector (time-major).
pub fn flatten(seq: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(seq.len(), seq.transpose().iter().copied())
}

/// Reference solution of `min 1/2 x'Px + q'x` s.t. `l <= Ax <= u` by
/// enumerating every assignment of each row to free, lower or upper and
/// keeping the KKT point with valid multiplier signs.
pub fn active_set_oracle(
    p: &DMatrix<f64>,
    q: &DVector<f64>,
    a: &DMatrix<f64>,
    l: &DVector<f64>,
    u: &DVector<f64>,
) -> Option<DVector<f64>> {
    let n = p.nrows();
    let m = a.nrows();
    let combos = 3usize.pow(m as u32);
    let mut best: Option<(f64, DVector<f64>)> = None;
    for code in 0..combos {
        let mut state = Vec::with_capacity(m);
        let mut c = code;
        for _ in 0..m {
            state.push(c % 3);
            c /= 3;
        }
        let active: Vec<usize> = (0..m).filter(|&i| state[i] != 0).collect();
        let k = active.len();
        let mut kkt = DMatrix::zeros(n + k, n + k);
        kkt.view_mut((0, 0), (n, n)).copy_from(p);
        let mut rhs = DVector::zeros(n + k);
        rhs.rows_mut(0, n).copy_from(&(-q));
        for (j, &i) in active.iter().enumerate() {
            for c in 0..n {
                kkt[(n + j, c)] = a[(i, c)];
                kkt[(c, n + j)] = a[(i, c)];
            }
            rhs[n + j] = if state[i] == 1 { l[i] } else { u[i] };
        }
        let Some(sol) = kkt.lu().solve(&rhs) else { continue };
        let x = sol.rows(0, n).into_owned();
        let ax = a * &x;
        let feasible = (0..m).all(|i| ax[i] >= l[i] - 1e-9 && ax[i] <= u[i] + 1e-9);
        let signs = active.iter().enumerate().all(|(j, &i)| {
            let lam = sol[n + j];
            if state[i] == 1 {
                lam <= 1e-9
            } else {
                lam >= -1e-9
            }
        });
        if feasible && signs {
            let obj = 0.5 * x.dot(&(p * &x)) + q.dot(&x);
            if best.as_ref().map_or(true, |(b, _)| obj < *b) {
                best = Some((obj, x));
            }
        }
    }
    best.map(|(_, x)| x)
}

/// Largest violation of the KKT conditions of `(x, y)` for the box QP with
/// multiplier convention `Px + q + A'y = 0`, `y >= 0` on upper bounds.
pub fn kkt_residual(
    p: &DMatrix<f64>,
    q: &DVector<f64>,
    a: &DMatrix<f64>,
    l: &DVector<f64>,
    u: &DVector<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> f64 {
    let stat = (p * x + q + a.transpose() * y).amax();
    let ax = a * x;
    let mut worst = stat;
    for i in 0..a.nrows() {
        worst = worst.max(l[i] - ax[i]).max(ax[i] - u[i]);
        let comp = if y[i] > 0.0 {
            y[i] * (u[i] - ax[i]).abs()
        } else {
            -y[i] * (ax[i] - l[i]).abs()
        };
        if comp.is_finite() {
            worst = worst.max(comp);
        }
    }
    worst
}

/// A strongly convex 20-variable QP with 8 random two-sided inequality rows.
pub fn random_box_qp(seed: u64) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>, DVector<f64>, DVector<f64>) {
    let mut g = rng(seed);
    let m = random_matrix(&mut g, 20, 20);
    let p = m.transpose() * &m + DMatrix::identity(20, 20) * 0.1;
    let q = random_vector(&mut g, 20) * 5.0;
    let a = random_matrix(&mut g, 8, 20);
    let l = DVector::from_fn(8, |_, _| -0.2 - rand::Rng::random_range(&mut g, 0.0..1.0));
    let u = DVector::from_fn(8, |_, _| 0.2 + rand::Rng::random_range(&mut g, 0.0..1.0));
    (p, q, a, l, u)
}
