//! Minimisation of the `p`-Dirichlet energy on a ball with pinned values.
//!
//! The objective is the `p`-th power of the `D(p)` seminorm of the window,
//!
//! ```text
//! E(u) = Σ_x Σ_g |u(x g^{-1}) − u(x)|^p
//! ```
//!
//! where each in-ball edge is seen from both endpoints and, under the
//! implicit-zero convention, every exit `x → x g` outside the ball costs
//! `2|u(x)|^p`. `p = 2` is a symmetric positive linear system solved by
//! Jacobi-preconditioned conjugate gradients. Other `p > 1` go through a
//! damped Newton iteration whose steps are solved by the same CG on the
//! weighted Laplacian; an accelerated gradient method is kept as a slower
//! cross-check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cayley::CayleyBall;
use crate::error::{Error, Result};
use crate::function::{BallFunction, Exterior, MAX_EXPONENT};
use crate::scalar::tree_sum;

const NOT_FREE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Linear Euler–Lagrange system at `p = 2`.
    DirectLinear,
    /// Damped Newton with CG inner solves.
    IterativeConvex,
    /// Accelerated first-order descent with backtracking and restarts.
    AcceleratedGradient,
}

impl SolverKind {
    fn name(self) -> &'static str {
        match self {
            SolverKind::DirectLinear => "linear",
            SolverKind::IterativeConvex => "newton",
            SolverKind::AcceleratedGradient => "accelerated-gradient",
        }
    }
}

/// Tolerances and caps. Defaults: relative CG residual `1e-10` at `p = 2`,
/// gradient norm `≤ 1e-8·(1 + E)` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub linear_tolerance: f64,
    pub gradient_tolerance: f64,
    pub max_cg_iterations: usize,
    pub max_newton_iterations: usize,
    pub max_gradient_iterations: usize,
    /// Force the first-order method for `p ≠ 2`.
    pub accelerated: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            linear_tolerance: 1e-10,
            gradient_tolerance: 1e-8,
            max_cg_iterations: 50_000,
            max_newton_iterations: 200,
            max_gradient_iterations: 200_000,
            accelerated: false,
        }
    }
}

/// Energy minimisation problem on a ball.
#[derive(Clone, Debug)]
pub struct EnergyProblem<'a> {
    ball: &'a CayleyBall,
    p: f64,
    pinned: Vec<Option<f64>>,
    exterior: Exterior,
}

/// Result of a solve. `residual` is the relative linear residual for the
/// linear solver and equals `gradient_norm / (1 + energy)` otherwise.
#[derive(Clone, Debug)]
pub struct SolveReport<'a> {
    pub minimizer: BallFunction<'a, f64>,
    pub energy: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub residual: f64,
    pub solver: SolverKind,
}

impl<'a> EnergyProblem<'a> {
    pub fn new(ball: &'a CayleyBall, p: f64, exterior: Exterior) -> Result<Self> {
        if !(p > 1.0 && p <= MAX_EXPONENT) {
            return Err(Error::InvalidParameter(format!(
                "energy minimisation needs 1 < p <= {MAX_EXPONENT}, got {p}"
            )));
        }
        Ok(EnergyProblem {
            ball,
            p,
            pinned: vec![None; ball.len()],
            exterior,
        })
    }

    pub fn pin(&mut self, vertex: usize, value: f64) -> &mut Self {
        self.pinned[vertex] = Some(value);
        self
    }

    pub fn ball(&self) -> &'a CayleyBall {
        self.ball
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `E(u)` for a full vector of ball values.
    pub fn energy(&self, u: &[f64]) -> f64 {
        let ball = self.ball;
        let p = self.p;
        let per_vertex: Vec<f64> = (0..ball.len())
            .into_par_iter()
            .map(|i| {
                let mut s = 0.0;
                for j in 0..ball.degree() {
                    match ball.neighbor(i, j) {
                        Some(k) => s += (u[k] - u[i]).abs().powf(p),
                        None if self.exterior == Exterior::ImplicitZero => {
                            s += 2.0 * u[i].abs().powf(p)
                        }
                        None => {}
                    }
                }
                s
            })
            .collect();
        tree_sum(&per_vertex)
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<SolveReport<'a>> {
        let sys = System::new(self)?;
        let mut u: Vec<f64> = self.pinned.iter().map(|v| v.unwrap_or(0.0)).collect();

        if self.p == 2.0 {
            let (iters, rel) = sys.solve_linear(&mut u, opts)?;
            let energy = self.energy(&u);
            let grad = sys.gradient(&u, 2.0);
            return Ok(self.report(u, energy, iters, norm(&grad), rel, SolverKind::DirectLinear));
        }

        // warm start from the p = 2 minimiser
        let (warm, _) = sys.solve_linear(&mut u, opts)?;
        let (iters, energy, gnorm, kind) = if opts.accelerated {
            let (i, e, g) = sys.accelerated(&mut u, self, opts)?;
            (i, e, g, SolverKind::AcceleratedGradient)
        } else {
            let (i, e, g) = sys.newton(&mut u, self, opts)?;
            (i, e, g, SolverKind::IterativeConvex)
        };
        Ok(self.report(u, energy, warm + iters, gnorm, gnorm / (1.0 + energy), kind))
    }

    fn report(
        &self,
        u: Vec<f64>,
        energy: f64,
        iterations: usize,
        gnorm: f64,
        residual: f64,
        solver: SolverKind,
    ) -> SolveReport<'a> {
        SolveReport {
            minimizer: BallFunction::new(self.ball, u, self.exterior).expect("length matches ball"),
            energy,
            iterations,
            gradient_norm: gnorm,
            residual,
            solver,
        }
    }
}

/// Free-variable view of a problem: CSR adjacency over free vertices.
struct System {
    free: Vec<usize>,
    slot: Vec<u32>,
    /// Row `r` lists ball indices of in-ball neighbours of `free[r]`.
    start: Vec<usize>,
    nbrs: Vec<u32>,
    /// Exits to the exterior that carry energy (implicit-zero only).
    exits: Vec<u32>,
}

impl System {
    fn new(problem: &EnergyProblem<'_>) -> Result<Self> {
        let ball = problem.ball;
        if problem.pinned.iter().all(Option::is_none) {
            return Err(Error::InvalidInput(
                "energy problem has no pinned vertex".into(),
            ));
        }
        let free: Vec<usize> = (0..ball.len())
            .filter(|&i| problem.pinned[i].is_none())
            .collect();
        let mut slot = vec![NOT_FREE; ball.len()];
        for (r, &i) in free.iter().enumerate() {
            slot[i] = r as u32;
        }
        let mut start = Vec::with_capacity(free.len() + 1);
        let mut nbrs = Vec::with_capacity(free.len() * ball.degree());
        let mut exits = Vec::with_capacity(free.len());
        start.push(0);
        for &i in &free {
            let mut ext = 0;
            for j in 0..ball.degree() {
                match ball.neighbor(i, j) {
                    Some(k) => nbrs.push(k as u32),
                    None if problem.exterior == Exterior::ImplicitZero => ext += 1,
                    None => {}
                }
            }
            exits.push(ext);
            start.push(nbrs.len());
        }
        Ok(System {
            free,
            slot,
            start,
            nbrs,
            exits,
        })
    }

    fn n(&self) -> usize {
        self.free.len()
    }

    /// `∇E` restricted to free vertices.
    fn gradient(&self, u: &[f64], p: f64) -> Vec<f64> {
        (0..self.n())
            .into_par_iter()
            .map(|r| {
                let i = self.free[r];
                let mut g = 0.0;
                for &k in &self.nbrs[self.start[r]..self.start[r + 1]] {
                    let d = u[i] - u[k as usize];
                    g += d.abs().powf(p - 1.0) * d.signum();
                }
                g += self.exits[r] as f64 * u[i].abs().powf(p - 1.0) * u[i].signum();
                2.0 * p * g
            })
            .collect()
    }

    /// Weighted Laplacian `y = H s` on free variables, with per-entry edge
    /// weights aligned with `nbrs` and diagonal exit weights.
    fn apply(&self, edge_w: &[f64], exit_w: &[f64], s: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(r, out)| {
            let mut acc = exit_w[r] * s[r];
            let span = self.start[r]..self.start[r + 1];
            for (&k, &w) in self.nbrs[span.clone()].iter().zip(&edge_w[span]) {
                let k = k as usize;
                let other = match self.slot[k] {
                    NOT_FREE => 0.0,
                    c => s[c as usize],
                };
                acc += w * (s[r] - other);
            }
            *out = acc;
        });
    }

    fn diagonal(&self, edge_w: &[f64], exit_w: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|r| exit_w[r] + edge_w[self.start[r]..self.start[r + 1]].iter().sum::<f64>())
            .collect()
    }

    fn solve_linear(&self, u: &mut [f64], opts: &SolverOptions) -> Result<(usize, f64)> {
        let edge_w = vec![1.0; self.nbrs.len()];
        let exit_w: Vec<f64> = self.exits.iter().map(|&e| e as f64).collect();
        let mut b = vec![0.0; self.n()];
        for (r, br) in b.iter_mut().enumerate() {
            for &k in &self.nbrs[self.start[r]..self.start[r + 1]] {
                if self.slot[k as usize] == NOT_FREE {
                    *br += u[k as usize];
                }
            }
        }
        let mut x: Vec<f64> = self.free.iter().map(|&i| u[i]).collect();
        let diag = self.diagonal(&edge_w, &exit_w);
        let (iters, rel) = pcg(
            |s, y| self.apply(&edge_w, &exit_w, s, y),
            &diag,
            &b,
            &mut x,
            opts.linear_tolerance,
            opts.max_cg_iterations,
        );
        if rel > opts.linear_tolerance {
            return Err(Error::SolverFailure {
                solver: SolverKind::DirectLinear.name(),
                iterations: iters,
                gradient_norm: rel,
            });
        }
        for (r, &i) in self.free.iter().enumerate() {
            u[i] = x[r];
        }
        Ok((iters, rel))
    }

    fn scatter(&self, u: &mut [f64], base: &[f64], step: &[f64], t: f64) {
        for (r, &i) in self.free.iter().enumerate() {
            u[i] = base[r] + t * step[r];
        }
    }

    fn newton(
        &self,
        u: &mut [f64],
        problem: &EnergyProblem<'_>,
        opts: &SolverOptions,
    ) -> Result<(usize, f64, f64)> {
        let p = problem.p;
        let mut energy = problem.energy(u);
        let mut total_cg = 0;
        for it in 0..opts.max_newton_iterations {
            let grad = self.gradient(u, p);
            let gnorm = norm(&grad);
            if gnorm <= opts.gradient_tolerance * (1.0 + energy) {
                return Ok((it + total_cg, energy, gnorm));
            }
            // Hessian weights 2p(p−1)|d|^{p−2}, floored differences for p < 2
            let scale = self
                .free
                .iter()
                .map(|&i| u[i].abs())
                .fold(0.0, f64::max)
                .max(1e-300);
            let floor = 1e-9 * scale;
            let c = 2.0 * p * (p - 1.0);
            let mut edge_w = Vec::with_capacity(self.nbrs.len());
            for r in 0..self.n() {
                let i = self.free[r];
                for &k in &self.nbrs[self.start[r]..self.start[r + 1]] {
                    let d = (u[i] - u[k as usize]).abs();
                    edge_w.push(c * d.max(floor).powf(p - 2.0));
                }
            }
            let exit_w: Vec<f64> = (0..self.n())
                .map(|r| c * self.exits[r] as f64 * u[self.free[r]].abs().max(floor).powf(p - 2.0))
                .collect();
            let diag = self.diagonal(&edge_w, &exit_w);
            let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
            let mut step = vec![0.0; self.n()];
            let forcing = (gnorm / (1.0 + energy)).sqrt().min(0.1);
            let (cg, _) = pcg(
                |s, y| self.apply(&edge_w, &exit_w, s, y),
                &diag,
                &rhs,
                &mut step,
                forcing,
                opts.max_cg_iterations,
            );
            total_cg += cg;
            let mut slope = dot(&grad, &step);
            if !(slope < 0.0) {
                step = grad
                    .iter()
                    .zip(&diag)
                    .map(|(g, d)| -g / d.max(1e-300))
                    .collect();
                slope = dot(&grad, &step);
            }
            let base: Vec<f64> = self.free.iter().map(|&i| u[i]).collect();
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                self.scatter(u, &base, &step, t);
                let trial = problem.energy(u);
                if trial <= energy + 1e-4 * t * slope {
                    energy = trial;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                self.scatter(u, &base, &step, 0.0);
                // no descent possible at working precision
                let gnorm = norm(&self.gradient(u, p));
                if gnorm <= opts.gradient_tolerance * (1.0 + energy) {
                    return Ok((it + total_cg, energy, gnorm));
                }
                return Err(Error::SolverFailure {
                    solver: SolverKind::IterativeConvex.name(),
                    iterations: it,
                    gradient_norm: gnorm,
                });
            }
        }
        let gnorm = norm(&self.gradient(u, p));
        if gnorm <= opts.gradient_tolerance * (1.0 + energy) {
            return Ok((opts.max_newton_iterations + total_cg, energy, gnorm));
        }
        Err(Error::SolverFailure {
            solver: SolverKind::IterativeConvex.name(),
            iterations: opts.max_newton_iterations,
            gradient_norm: gnorm,
        })
    }

    /// FISTA with backtracking on the Lipschitz estimate and function-value
    /// restarts.
    fn accelerated(
        &self,
        u: &mut [f64],
        problem: &EnergyProblem<'_>,
        opts: &SolverOptions,
    ) -> Result<(usize, f64, f64)> {
        let p = problem.p;
        let mut x: Vec<f64> = self.free.iter().map(|&i| u[i]).collect();
        let mut y = x.clone();
        let mut t = 1.0f64;
        let mut lip = 1.0f64;
        let mut fx = problem.energy(u);
        let mut work = u.to_vec();
        let zero = vec![0.0; self.n()];
        for it in 0..opts.max_gradient_iterations {
            self.scatter(&mut work, &y, &zero, 0.0);
            let fy = problem.energy(&work);
            let g = self.gradient(&work, p);
            let gg = dot(&g, &g);
            let mut x_new;
            let mut f_new;
            loop {
                x_new = y
                    .iter()
                    .zip(&g)
                    .map(|(yi, gi)| yi - gi / lip)
                    .collect::<Vec<f64>>();
                self.scatter(&mut work, &x_new, &zero, 0.0);
                f_new = problem.energy(&work);
                if f_new <= fy - 0.5 * gg / lip || lip > 1e300 {
                    break;
                }
                lip *= 2.0;
            }
            let t_new = if f_new > fx {
                1.0
            } else {
                0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
            };
            let momentum = if f_new > fx { 0.0 } else { (t - 1.0) / t_new };
            y = x_new
                .iter()
                .zip(&x)
                .map(|(a, b)| a + momentum * (a - b))
                .collect();
            x = x_new;
            fx = f_new;
            t = t_new;
            lip *= 0.9;
            let gx = norm(&self.gradient(&work, p));
            if gx <= opts.gradient_tolerance * (1.0 + fx) {
                self.scatter(u, &x, &zero, 0.0);
                return Ok((it + 1, fx, gx));
            }
        }
        self.scatter(u, &x, &zero, 0.0);
        let gnorm = norm(&self.gradient(u, p));
        Err(Error::SolverFailure {
            solver: SolverKind::AcceleratedGradient.name(),
            iterations: opts.max_gradient_iterations,
            gradient_norm: gnorm,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let terms: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    tree_sum(&terms)
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Jacobi-preconditioned CG for an SPD operator. Returns iterations and the
/// final relative residual `‖b − Ax‖ / ‖b‖`.
fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    rtol: f64,
    max_iter: usize,
) -> (usize, f64) {
    let n = b.len();
    let bnorm = norm(b);
    if n == 0 {
        return (0, 0.0);
    }
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return (0, 0.0);
    }
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let inv: Vec<f64> = diag
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut z: Vec<f64> = r.iter().zip(&inv).map(|(ri, m)| ri * m).collect();
    let mut dir = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut rel = norm(&r) / bnorm;
    let mut it = 0;
    while rel > rtol && it < max_iter {
        apply(&dir, &mut q);
        let dq = dot(&dir, &q);
        if dq <= 0.0 {
            break;
        }
        let alpha = rz / dq;
        x.par_iter_mut()
            .zip(&dir)
            .for_each(|(xi, di)| *xi += alpha * di);
        r.par_iter_mut()
            .zip(&q)
            .for_each(|(ri, qi)| *ri -= alpha * qi);
        z.par_iter_mut()
            .zip(&r)
            .zip(&inv)
            .for_each(|((zi, ri), m)| *zi = ri * m);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        dir.par_iter_mut()
            .zip(&z)
            .for_each(|(di, zi)| *di = zi + beta * *di);
        it += 1;
        // recompute the true residual every so often to avoid drift
        if it % 200 == 0 {
            apply(x, &mut ax);
            r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        }
        rel = norm(&r) / bnorm;
    }
    apply(x, &mut ax);
    let true_rel = norm(
        &b.iter()
            .zip(&ax)
            .map(|(bi, ai)| bi - ai)
            .collect::<Vec<_>>(),
    ) / bnorm;
    (it, true_rel)
}
