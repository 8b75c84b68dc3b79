//! Success-rate study for the one-step motion problem, checked against an
//! independent interior-point reference solver.

use std::time::Instant;

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use dualplan_core::pcp::{MotionProblem, PcpParams};
use dualplan_core::Vec3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    /// Waypoint distance range, meters.
    pub w_min: f64,
    pub w_max: f64,
    /// Share of waypoints placed at exactly `waypoint_dist`, as the ray
    /// search emits them.
    pub fixed_dist_fraction: f64,
    pub waypoint_dist: f64,
    /// Share of instances with the speed at the limit.
    pub at_limit_fraction: f64,
    /// Share of instances whose waypoint lies on the zero-acceleration
    /// rollout.
    pub coasting_fraction: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub a_max: f64,
    pub v_max: f64,
    pub eta1: f64,
    pub eta2: f64,
}

impl Default for InstanceParams {
    fn default() -> Self {
        let p = PcpParams::default();
        Self {
            w_min: 0.01,
            w_max: p.r_det,
            fixed_dist_fraction: 0.3,
            waypoint_dist: p.waypoint_dist,
            at_limit_fraction: 0.2,
            coasting_fraction: 0.05,
            t_min: p.t_avs_floor,
            t_max: p.t_avs_ceiling,
            a_max: p.a_max,
            v_max: p.v_max,
            eta1: p.eta1,
            eta2: p.eta2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Instance {
    pub problem: MotionProblem,
    pub coasting: bool,
}

fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

pub fn generate_instances(n: usize, p: &InstanceParams, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let pos = Vec3::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(0.5..3.0));
            let speed = if rng.random_bool(p.at_limit_fraction) {
                p.v_max
            } else {
                p.v_max * rng.random::<f64>().cbrt()
            };
            let v = unit(&mut rng) * speed;
            let t = rng.random_range(p.t_min..=p.t_max);
            let coasting = speed > 0.0 && rng.random_bool(p.coasting_fraction);
            let w = if coasting {
                pos + v * t
            } else if rng.random_bool(p.fixed_dist_fraction) {
                pos + unit(&mut rng) * p.waypoint_dist
            } else {
                pos + unit(&mut rng) * rng.random_range(p.w_min..=p.w_max)
            };
            Instance {
                problem: MotionProblem {
                    p: pos,
                    v,
                    w,
                    t,
                    a_max: p.a_max,
                    v_max: p.v_max,
                    eta1: p.eta1,
                    eta2: p.eta2,
                },
                coasting,
            }
        })
        .collect()
}

/// Barrier-smoothed objective with its gradient and Hessian, for the
/// reference solver.
struct Smoothed<'a> {
    q: &'a MotionProblem,
    c1: Vec3,
    b: Vec3,
    proj: Matrix3<f64>,
    r: f64,
    mu: f64,
}

impl<'a> Smoothed<'a> {
    fn new(q: &'a MotionProblem) -> Self {
        let t = q.t;
        let d = q.w - q.p;
        let proj = match d.try_normalize(0.0) {
            Some(u) => Matrix3::identity() - u * u.transpose(),
            None => Matrix3::zeros(),
        };
        Self {
            q,
            c1: (d - q.v * t) * (2.0 / (t * t)),
            b: q.v / t,
            proj,
            r: q.v_max / t,
            mu: 1.0,
        }
    }

    fn slacks(&self, a: &Vec3) -> (f64, f64) {
        (self.q.a_max.powi(2) - a.norm_squared(), self.r.powi(2) - (a + self.b).norm_squared())
    }

    fn value(&self, a: &Vec3) -> f64 {
        let (s1, s2) = self.slacks(a);
        if s1 <= 0.0 || s2 <= 0.0 {
            return f64::INFINITY;
        }
        let x = a - self.c1;
        let y = self.proj * (a + self.b);
        a.norm_squared() + self.q.eta1 * (x.norm_squared() + self.mu * self.mu).sqrt()
            + self.q.eta2 * (y.norm_squared() + self.mu * self.mu).sqrt()
            - self.mu * (s1.ln() + s2.ln())
    }

    fn derivatives(&self, a: &Vec3) -> (Vec3, Matrix3<f64>) {
        let id = Matrix3::identity();
        let x = a - self.c1;
        let f1 = (x.norm_squared() + self.mu * self.mu).sqrt();
        let y = self.proj * (a + self.b);
        let f2 = (y.norm_squared() + self.mu * self.mu).sqrt();
        let z = a + self.b;
        let (s1, s2) = self.slacks(a);
        let g = a * 2.0 + x * (self.q.eta1 / f1) + y * (self.q.eta2 / f2) + a * (2.0 * self.mu / s1) + z * (2.0 * self.mu / s2);
        let h = id * 2.0
            + (id - x * x.transpose() / (f1 * f1)) * (self.q.eta1 / f1)
            + (self.proj - y * y.transpose() / (f2 * f2)) * (self.q.eta2 / f2)
            + (id * (2.0 / s1) + a * a.transpose() * (4.0 / (s1 * s1))) * self.mu
            + (id * (2.0 / s2) + z * z.transpose() * (4.0 / (s2 * s2))) * self.mu;
        (g, h)
    }
}

/// Reference minimizer: Newton's method on a log-barrier, smoothed
/// objective, following the barrier weight down to 1e-12. Returns `None`
/// when the feasible set has no interior.
pub fn reference_solve(q: &MotionProblem) -> Option<Vec3> {
    let mut s = Smoothed::new(q);
    let nb = s.b.norm();
    if nb >= s.r + q.a_max {
        return None;
    }
    // Midpoint of the overlap of the two balls along −b.
    let mut a = if nb > 0.0 {
        let rho = ((nb - s.r).max(0.0) + q.a_max.min(nb + s.r)) / 2.0;
        -s.b / nb * rho
    } else {
        Vec3::zeros()
    };
    let mut mu = 1e-1;
    while mu >= 1e-12 {
        s.mu = mu;
        for _ in 0..100 {
            let (g, h) = s.derivatives(&a);
            let step = match h.cholesky() {
                Some(c) => -c.solve(&g),
                None => -g,
            };
            let decrement = -g.dot(&step);
            if decrement < 1e-14 * (1.0 + s.value(&a).abs()) {
                break;
            }
            let f0 = s.value(&a);
            let mut alpha = 1.0;
            let mut moved = false;
            while alpha > 1e-16 {
                let cand = a + step * alpha;
                if s.value(&cand) <= f0 - 0.25 * alpha * decrement {
                    a = cand;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !moved {
                break;
            }
        }
        mu *= 0.1;
    }
    Some(a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapReport {
    pub max_iters: usize,
    /// Share of instances whose answer matches the reference within `tol`.
    pub success_rate: f64,
    /// Share the solver itself reports as converged.
    pub reported_converged: f64,
    pub mean_iterations: f64,
    /// Mean wall time per solve, microseconds.
    pub mean_time_us: f64,
    /// Commands violating `‖a‖ ≤ a_max` or `‖v + a·t‖ ≤ v_max`.
    pub limit_violations: usize,
    pub coasting_instances: usize,
    /// Coasting instances solved with `a ≈ 0` (within `tol`) in at most two
    /// iterations.
    pub coasting_exact: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    pub schema: u32,
    pub instances: usize,
    pub seed: u64,
    pub tol: f64,
    pub caps: Vec<CapReport>,
}

/// A solution is accepted when it lies within `tol` (m/s²) of the reference
/// or is at least as good as the reference.
pub fn matches_reference(q: &MotionProblem, a: &Vec3, reference: &Vec3, tol: f64) -> bool {
    (a - reference).norm() <= tol || q.objective(a) <= q.objective(reference)
}

pub fn bench_optimizer(n: usize, caps: &[usize], tol: f64, params: &InstanceParams, seed: u64) -> OptimizerReport {
    let instances = generate_instances(n, params, seed);
    let references: Vec<Option<Vec3>> = instances.iter().map(|i| reference_solve(&i.problem)).collect();
    let caps = caps
        .iter()
        .map(|&cap| {
            let (mut ok, mut reported, mut iters, mut violations, mut coast, mut coast_ok) = (0, 0, 0, 0, 0, 0);
            let mut time = 0.0;
            for (inst, reference) in instances.iter().zip(&references) {
                let q = &inst.problem;
                let t0 = Instant::now();
                let sol = q.solve(cap, tol);
                time += t0.elapsed().as_secs_f64();
                iters += sol.iterations;
                reported += usize::from(sol.converged);
                if !q.feasible(&sol.a) {
                    violations += 1;
                }
                let good = match reference {
                    Some(r) => matches_reference(q, &sol.a, r, tol),
                    None => sol.a == q.brake(),
                };
                ok += usize::from(good);
                if inst.coasting {
                    coast += 1;
                    coast_ok += usize::from(sol.a.norm() <= tol && sol.iterations <= 2 && sol.converged);
                }
            }
            let nf = n.max(1) as f64;
            CapReport {
                max_iters: cap,
                success_rate: ok as f64 / nf,
                reported_converged: reported as f64 / nf,
                mean_iterations: iters as f64 / nf,
                mean_time_us: time * 1e6 / nf,
                limit_violations: violations,
                coasting_instances: coast,
                coasting_exact: coast_ok,
            }
        })
        .collect();
    OptimizerReport {
        schema: 1,
        instances: n,
        seed,
        tol,
        caps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_beats_dense_sampling() {
        let inst = generate_instances(40, &InstanceParams::default(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for i in inst {
            let q = &i.problem;
            let a = reference_solve(q).expect("interior exists");
            assert!(q.feasible(&a));
            let j = q.objective(&a);
            for _ in 0..3000 {
                let c = unit(&mut rng) * q.a_max * rng.random::<f64>().cbrt();
                if q.feasible(&c) {
                    assert!(q.objective(&c) >= j - 1e-7 * j.max(1.0), "{c:?} beats {a:?}");
                }
            }
        }
    }

    #[test]
    fn reference_finds_closed_forms() {
        let base = MotionProblem {
            p: Vec3::zeros(),
            v: Vec3::zeros(),
            w: Vec3::new(0.3, 0.0, 0.0),
            t: 0.016,
            a_max: 2.0,
            v_max: 1.0,
            eta1: 40.0,
            eta2: 10.0,
        };
        // Far waypoint from rest: full thrust towards it.
        let a = reference_solve(&base).unwrap();
        assert!((a - Vec3::new(2.0, 0.0, 0.0)).norm() < 1e-5, "{a:?}");
        // Coasting: zero.
        let v = Vec3::new(0.5, 0.1, 0.0);
        let coast = MotionProblem { v, w: v * 0.016, ..base };
        assert!(reference_solve(&coast).unwrap().norm() < 1e-5);
    }

    #[test]
    fn generator_mix_and_determinism() {
        let p = InstanceParams::default();
        let a = generate_instances(2000, &p, 9);
        assert_eq!(a, generate_instances(2000, &p, 9));
        let coasting = a.iter().filter(|i| i.coasting).count();
        assert!((50..=150).contains(&coasting), "{coasting}");
        for i in &a {
            let q = &i.problem;
            assert!(q.v.norm() <= p.v_max + 1e-12);
            assert!((p.t_min..=p.t_max).contains(&q.t));
            assert!((q.w - q.p).norm() <= p.w_max + 1e-12);
        }
    }

    #[test]
    fn small_study_is_consistent() {
        let r = bench_optimizer(500, &[5, 20, 80], 1e-3, &InstanceParams::default(), 1);
        assert_eq!(r.caps.len(), 3);
        for c in &r.caps {
            assert_eq!(c.limit_violations, 0);
            assert_eq!(c.coasting_exact, c.coasting_instances);
        }
        assert!(r.caps[2].success_rate >= r.caps[1].success_rate);
        assert!(r.caps[1].success_rate >= 0.99);
    }
}
