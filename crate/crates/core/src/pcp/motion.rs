//! One-step motion problem: pick the acceleration that brings the predicted
//! position close to `w_pn` while keeping the doubled-horizon prediction near
//! the line `p_n → w_pn`, under speed and acceleration limits.
//!
//! With `c1 = 2(w − p − v·t)/t²` and `b = v/t`, the two endpoint residuals of
//! the kinematic rollout are `(t²/2)·‖c1 − a‖` and `2t²·‖P⊥(a + b)‖`, where
//! `P⊥` removes the component along `w − p`. The objective used here weighs
//! those residuals in acceleration units:
//!
//! `J(a) = ‖a‖² + η1‖c1 − a‖ + η2‖P⊥(a + b)‖`
//!
//! over `‖a‖ ≤ a_max`, `‖a + b‖ ≤ v_max/t`. The solver reduces the problem to
//! the plane spanned by `w − p` and the cross-track part of `b` (the minimiser
//! never leaves it) and then checks every place the minimiser can sit: the
//! smooth stationary points, the kink line, the kink point and the two
//! boundary arcs.

use serde::{Deserialize, Serialize};

use nalgebra::Vector2;

use crate::types::Vec3;

type P2 = Vector2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommandMode {
    Normal,
    BackupSteer,
    BackupBrake,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionCommand {
    pub a: Vec3,
    pub p_next: Vec3,
    pub v_next: Vec3,
    pub mode: CommandMode,
}

impl MotionCommand {
    pub fn from_accel(p: &Vec3, v: &Vec3, a: Vec3, t: f64, mode: CommandMode) -> Self {
        Self {
            a,
            p_next: p + v * t + a * (0.5 * t * t),
            v_next: v + a * t,
            mode,
        }
    }

    /// Hover command at rest.
    pub fn hold(p: &Vec3) -> Self {
        Self::from_accel(p, &Vec3::zeros(), Vec3::zeros(), 0.0, CommandMode::Normal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionProblem {
    pub p: Vec3,
    pub v: Vec3,
    pub w: Vec3,
    pub t: f64,
    pub a_max: f64,
    pub v_max: f64,
    pub eta1: f64,
    pub eta2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionSolution {
    pub a: Vec3,
    pub iterations: usize,
    pub converged: bool,
}

impl MotionProblem {
    pub fn objective(&self, a: &Vec3) -> f64 {
        let t = self.t;
        let d = self.w - self.p;
        let c1 = (d - self.v * t) * (2.0 / (t * t));
        let b = self.v / t;
        let perp = match d.try_normalize(0.0) {
            Some(u) => {
                let s = a + b;
                (s - u * u.dot(&s)).norm()
            }
            None => 0.0,
        };
        a.norm_squared() + self.eta1 * (c1 - a).norm() + self.eta2 * perp
    }

    pub fn feasible(&self, a: &Vec3) -> bool {
        a.norm() <= self.a_max && (self.v + a * self.t).norm() <= self.v_max
    }

    /// Strongest deceleration within `a_max`, stopping exactly if possible.
    pub fn brake(&self) -> Vec3 {
        let a = -self.v / self.t;
        if a.norm() <= self.a_max {
            a
        } else {
            a.normalize() * self.a_max
        }
    }

    pub fn command(&self, a: Vec3, mode: CommandMode) -> MotionCommand {
        MotionCommand::from_accel(&self.p, &self.v, a, self.t, mode)
    }

    /// `tol` bounds the final bracket width, in m/s², of every 1D search.
    pub fn solve(&self, max_iters: usize, tol: f64) -> MotionSolution {
        let t = self.t;
        let d = self.w - self.p;
        let b = self.v / t;
        let (big_a, big_r) = (self.a_max, self.v_max / t);
        let Some(u) = d.try_normalize(1e-12) else {
            return self.finish(self.brake(), 0, true);
        };
        if b.norm() > big_r + big_a {
            // Speed above the limit by more than one step of braking.
            return self.finish(self.brake(), 0, true);
        }
        let c1 = (d - self.v * t) * (2.0 / (t * t));
        let b_perp = b - u * u.dot(&b);
        let scale = 1.0 + b.norm();
        let (e, beta) = match b_perp.try_normalize(1e-12 * scale) {
            Some(e) => (e, b_perp.norm()),
            None => (any_orthogonal(&u), 0.0),
        };
        let plane = Planar {
            c: P2::new(u.dot(&c1), e.dot(&c1)),
            b: P2::new(u.dot(&b), beta),
            a: big_a,
            r: big_r,
            eta1: self.eta1,
            eta2: self.eta2,
        };
        let best = plane.solve(max_iters, tol);
        self.finish(u * best.x.x + e * best.x.y, best.iterations, best.converged)
    }

    /// Pulls `a` towards a strictly feasible point until the limits hold in
    /// floating point.
    fn finish(&self, mut a: Vec3, iterations: usize, converged: bool) -> MotionSolution {
        if !self.feasible(&a) {
            let b = self.v / self.t;
            let r = self.v_max / self.t;
            let nb = b.norm();
            let inner = if nb > 0.0 {
                let rho = ((nb - r).max(0.0) + self.a_max.min(nb + r)) / 2.0;
                -b / nb * rho
            } else {
                Vec3::zeros()
            };
            let mut shrink = 1e-15;
            while !self.feasible(&a) && shrink < 1.0 {
                a = inner + (a - inner) * (1.0 - shrink);
                shrink *= 4.0;
            }
            if !self.feasible(&a) {
                a = self.brake();
            }
        }
        MotionSolution { a, iterations, converged }
    }
}

fn any_orthogonal(u: &Vec3) -> Vec3 {
    let seed = if u.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    (seed - u * u.dot(&seed)).normalize()
}

struct Planar {
    c: P2,
    b: P2,
    a: f64,
    r: f64,
    eta1: f64,
    eta2: f64,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    x: P2,
    f: f64,
    iterations: usize,
    converged: bool,
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Coarse scan followed by golden-section refinement around the best sample.
fn minimize_interval(f: impl Fn(f64) -> f64, lo: f64, hi: f64, samples: usize, scale: f64, tol: f64, max_iters: usize) -> (f64, f64, usize, bool) {
    let at = |i: usize| lo + (hi - lo) * i as f64 / samples as f64;
    let (mut best_t, mut best_f) = (lo, f(lo));
    let mut best_i = 0;
    for i in 1..=samples {
        let ti = at(i);
        let fi = f(ti);
        if fi < best_f {
            (best_t, best_f, best_i) = (ti, fi, i);
        }
    }
    let (mut a, mut b) = (at(best_i.saturating_sub(1)), at((best_i + 1).min(samples)));
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iters = 0;
    while (b - a) * scale > tol && iters < max_iters {
        if fc < fd {
            b = d;
            (d, fd) = (c, fc);
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            (c, fc) = (d, fd);
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
        iters += 1;
    }
    for (ti, fi) in [(c, fc), (d, fd)] {
        if fi < best_f {
            (best_t, best_f) = (ti, fi);
        }
    }
    (best_t, best_f, iters, (b - a) * scale <= tol)
}

impl Planar {
    fn f(&self, x: &P2) -> f64 {
        x.norm_squared() + self.eta1 * (x - self.c).norm() + self.eta2 * (x.y + self.b.y).abs()
    }

    fn inside(&self, x: &P2) -> bool {
        let slack = 1e-9;
        x.norm() <= self.a * (1.0 + slack) && (x + self.b).norm() <= self.r * (1.0 + slack)
    }

    fn exact(&self, x: P2) -> Candidate {
        Candidate {
            x,
            f: self.f(&x),
            iterations: 0,
            converged: true,
        }
    }

    fn solve(&self, max_iters: usize, tol: f64) -> Candidate {
        let mut cands: Vec<Candidate> = Vec::new();
        let beta = self.b.y;
        // Kink point of the endpoint term.
        if self.inside(&self.c) {
            cands.push(self.exact(self.c));
        }
        // Stationary points on either side of the kink line s = -β:
        // 2x + η2·σ·ŝ = -η1·(x - c)/‖x - c‖.
        for sigma in [1.0, -1.0] {
            let h = P2::new(0.0, self.eta2 * sigma / 2.0);
            let hc = h + self.c;
            let n = hc.norm();
            if n > self.eta1 / 2.0 {
                let x = hc * (self.eta1 / 2.0 / n) - h;
                if sigma * (x.y + beta) > 0.0 && self.inside(&x) {
                    cands.push(self.exact(x));
                }
            }
        }
        // The kink line itself, clipped to the feasible set.
        let s = -beta;
        if s.abs() <= self.a {
            let half = (self.a * self.a - s * s).sqrt();
            let lo = (-half).max(-self.b.x - self.r);
            let hi = half.min(-self.b.x + self.r);
            if lo <= hi {
                let (al, f, it, ok) = minimize_interval(|al| self.f(&P2::new(al, s)), lo, hi, 16, 1.0, tol, max_iters);
                cands.push(Candidate {
                    x: P2::new(al, s),
                    f,
                    iterations: it,
                    converged: ok,
                });
            }
        }
        // Boundary arcs.
        let nb = self.b.norm();
        let phi = self.b.y.atan2(self.b.x);
        let tau = std::f64::consts::TAU;
        let arc_a = if nb == 0.0 {
            (self.a <= self.r).then_some((0.0, tau))
        } else {
            let k = (self.r * self.r - self.a * self.a - nb * nb) / (2.0 * self.a * nb);
            if k >= 1.0 {
                Some((0.0, tau))
            } else if k < -1.0 {
                None
            } else {
                let w = k.acos();
                Some((phi + w, phi + tau - w))
            }
        };
        if let Some((lo, hi)) = arc_a {
            let pt = |th: f64| P2::new(th.cos(), th.sin()) * self.a;
            let (th, f, it, ok) = minimize_interval(|th| self.f(&pt(th)), lo, hi, 64, self.a, tol, max_iters);
            cands.push(Candidate {
                x: pt(th),
                f,
                iterations: it,
                converged: ok,
            });
        }
        let arc_r = if nb == 0.0 {
            (self.r < self.a).then_some((0.0, tau))
        } else {
            let k = (nb * nb + self.r * self.r - self.a * self.a) / (2.0 * self.r * nb);
            if k <= -1.0 {
                Some((0.0, tau))
            } else if k > 1.0 {
                None
            } else {
                let w = k.acos();
                Some((phi - w, phi + w))
            }
        };
        if let Some((lo, hi)) = arc_r {
            let pt = |th: f64| P2::new(th.cos(), th.sin()) * self.r - self.b;
            let (th, f, it, ok) = minimize_interval(|th| self.f(&pt(th)), lo, hi, 64, self.r, tol, max_iters);
            cands.push(Candidate {
                x: pt(th),
                f,
                iterations: it,
                converged: ok,
            });
        }
        cands
            .into_iter()
            .min_by(|a, b| a.f.total_cmp(&b.f))
            .unwrap_or_else(|| self.exact(P2::zeros()))
    }
}
