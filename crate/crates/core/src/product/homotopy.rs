//! Total-degree homotopy continuation for square systems of N−1 forms in
//! N homogeneous variables, tracked in a random affine chart.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::forms::Form;

type C = Complex64;

#[derive(Debug, Clone)]
pub struct Endpoint {
    /// Solution scaled to unit norm.
    pub z: Vec<C>,
    pub tracked: bool,
    pub nonsingular: bool,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct HomotopyResult {
    pub endpoints: Vec<Endpoint>,
    pub bezout: usize,
    /// Pairwise distinct, successfully tracked, nonsingular endpoints.
    pub distinct_nonsingular: usize,
    /// Every path reached a distinct nonsingular solution, so the list is
    /// the complete (finite) solution set of the square system.
    pub complete: bool,
}

struct System<'a> {
    target: &'a [Form],
    gamma: C,
    chart: Vec<C>,
    d: usize,
}

impl System<'_> {
    fn n(&self) -> usize {
        self.chart.len()
    }

    fn start(&self, k: usize, z: &[C]) -> (C, Vec<C>) {
        let n = self.n();
        let d = self.d as i32;
        let mut g = vec![C::new(0.0, 0.0); n];
        g[k + 1] = z[k + 1].powi(d - 1) * self.d as f64;
        g[0] = -z[0].powi(d - 1) * self.d as f64;
        (z[k + 1].powi(d) - z[0].powi(d), g)
    }

    /// H(z,t), ∂H/∂z, ∂H/∂t.
    fn eval(&self, z: &[C], t: f64) -> (Vec<C>, DMatrix<C>, Vec<C>) {
        let n = self.n();
        let mut h = vec![C::new(0.0, 0.0); n];
        let mut ht = vec![C::new(0.0, 0.0); n];
        let mut jac = DMatrix::zeros(n, n);
        for k in 0..n - 1 {
            let (fv, fg) = self.target[k].eval_grad(z);
            let (gv, gg) = self.start(k, z);
            h[k] = self.gamma * gv * (1.0 - t) + fv * t;
            ht[k] = fv - self.gamma * gv;
            for j in 0..n {
                jac[(k, j)] = self.gamma * gg[j] * (1.0 - t) + fg[j] * t;
            }
        }
        h[n - 1] = self.chart.iter().zip(z).map(|(a, b)| a * b).sum::<C>() - 1.0;
        for j in 0..n {
            jac[(n - 1, j)] = self.chart[j];
        }
        (h, jac, ht)
    }

    fn velocity(&self, z: &[C], t: f64) -> Option<Vec<C>> {
        let (_, jac, ht) = self.eval(z, t);
        let rhs = nalgebra::DVector::from_iterator(ht.len(), ht.iter().map(|v| -v));
        jac.lu().solve(&rhs).map(|v| v.iter().copied().collect())
    }

    /// Newton at fixed t; returns the corrected point and the last step size.
    fn newton(&self, z: &[C], t: f64, iters: usize, tol: f64) -> Option<(Vec<C>, f64)> {
        let mut cur = z.to_vec();
        let mut last = f64::INFINITY;
        for _ in 0..iters {
            let (h, jac, _) = self.eval(&cur, t);
            let rhs = nalgebra::DVector::from_iterator(h.len(), h.iter().map(|v| -v));
            let dz = jac.lu().solve(&rhs)?;
            let step = dz.norm();
            for (c, d) in cur.iter_mut().zip(dz.iter()) {
                *c += d;
            }
            let scale = 1.0 + norm(&cur);
            if step > last * 2.0 && step > tol * scale {
                return None;
            }
            last = step;
            if step <= tol * scale {
                return Some((cur, step));
            }
        }
        None
    }
}

fn norm(z: &[C]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(z: &[C], a: f64, v: &[C]) -> Vec<C> {
    z.iter().zip(v).map(|(x, y)| x + y * a).collect()
}

fn track(sys: &System, start: Vec<C>) -> (Vec<C>, bool) {
    let mut z = start;
    let mut t: f64 = 0.0;
    let mut h: f64 = 0.02;
    let mut streak = 0;
    while t < 1.0 {
        let step = h.min(1.0 - t);
        let predicted = (|| {
            let k1 = sys.velocity(&z, t)?;
            let k2 = sys.velocity(&axpy(&z, step / 2.0, &k1), t + step / 2.0)?;
            let k3 = sys.velocity(&axpy(&z, step / 2.0, &k2), t + step / 2.0)?;
            let k4 = sys.velocity(&axpy(&z, step, &k3), t + step)?;
            Some(
                (0..z.len())
                    .map(|i| z[i] + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (step / 6.0))
                    .collect::<Vec<C>>(),
            )
        })();
        let corrected = predicted.and_then(|p| {
            let moved = norm(&p.iter().zip(&z).map(|(a, b)| a - b).collect::<Vec<_>>());
            sys.newton(&p, t + step, 4, 1e-10).filter(|(_, first)| *first < 0.1 * (1.0 + moved))
        });
        match corrected {
            Some((znew, _)) => {
                z = znew;
                t += step;
                streak += 1;
                if streak >= 3 {
                    h = (h * 2.0).min(0.1);
                    streak = 0;
                }
                if norm(&z) > 1e10 {
                    return (z, false);
                }
            }
            None => {
                h /= 2.0;
                streak = 0;
                if h < 1e-14 {
                    return (z, false);
                }
            }
        }
    }
    let z = match sys.newton(&z, 1.0, 50, 1e-15) {
        Some((refined, _)) => refined,
        None => z,
    };
    (z, true)
}

fn unit(z: &[C]) -> Vec<C> {
    let nz = norm(z);
    z.iter().map(|c| c / nz).collect()
}

/// sin of the angle between two complex lines.
pub fn projective_distance(a: &[C], b: &[C]) -> f64 {
    let ip: C = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let c = ip.norm() / (norm(a) * norm(b));
    (1.0 - c * c).max(0.0).sqrt()
}

/// Solves `forms` (N−1 forms of a common degree d in N variables) by
/// tracking all d^{N−1} paths from z_k^d − z_0^d.
pub fn solve_square(forms: &[Form], seed: u64) -> HomotopyResult {
    let n = forms[0].vars();
    let d = forms[0].degree();
    assert_eq!(forms.len() + 1, n, "square system needs N−1 forms");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit_c = |r: &mut ChaCha8Rng| C::from_polar(1.0, r.random_range(0.0..std::f64::consts::TAU));
    let gamma = unit_c(&mut rng);
    let chart: Vec<C> = (0..n).map(|_| unit_c(&mut rng) * rng.random_range(0.5..1.5)).collect();
    let sys = System { target: forms, gamma, chart, d };
    let bezout = d.pow((n - 1) as u32);
    let roots: Vec<C> = (0..d).map(|j| C::from_polar(1.0, std::f64::consts::TAU * j as f64 / d as f64)).collect();
    let mut endpoints = Vec::with_capacity(bezout);
    for p in 0..bezout {
        let mut dir = vec![C::new(1.0, 0.0); n];
        let mut idx = p;
        for slot in dir.iter_mut().skip(1) {
            *slot = roots[idx % d];
            idx /= d;
        }
        let denom: C = sys.chart.iter().zip(&dir).map(|(a, b)| a * b).sum();
        let start: Vec<C> = dir.iter().map(|c| c / denom).collect();
        let (z, tracked) = track(&sys, start);
        let target_res = forms.iter().map(|f| f.eval(&unit(&z)).norm()).fold(0.0, f64::max);
        let (_, jac, _) = sys.eval(&z, 1.0);
        let sv = jac.singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let nonsingular = tracked && smin > 1e-8 * smax && target_res < 1e-8;
        endpoints.push(Endpoint { z: unit(&z), tracked, nonsingular, residual: target_res });
    }
    let mut distinct = 0;
    for i in 0..endpoints.len() {
        if !endpoints[i].nonsingular {
            continue;
        }
        let dup = (0..i).any(|j| endpoints[j].nonsingular && projective_distance(&endpoints[i].z, &endpoints[j].z) < 1e-6);
        if !dup {
            distinct += 1;
        }
    }
    HomotopyResult { complete: distinct == bezout, distinct_nonsingular: distinct, bezout, endpoints }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn binary_quadratic() {
        // x0² − x1² has roots (1, ±1)
        let f = Form::from_terms(2, 2, vec![(vec![2, 0], c(1.0)), (vec![0, 2], c(-1.0))]);
        let res = solve_square(&[f], 3);
        assert!(res.complete);
        assert_eq!(res.endpoints.len(), 2);
        for e in &res.endpoints {
            let ratio = e.z[1] / e.z[0];
            assert!((ratio.norm() - 1.0).abs() < 1e-10 && ratio.im.abs() < 1e-10);
        }
    }

    #[test]
    fn two_conics() {
        // x² − y² = 0, xy − z² = 0 : four points (1, ±1, ·)
        let f1 = Form::from_terms(3, 2, vec![(vec![2, 0, 0], c(1.0)), (vec![0, 2, 0], c(-1.0))]);
        let f2 = Form::from_terms(3, 2, vec![(vec![1, 1, 0], c(1.0)), (vec![0, 0, 2], c(-1.0))]);
        let res = solve_square(&[f1.clone(), f2.clone()], 11);
        assert!(res.complete, "{res:?}");
        for e in &res.endpoints {
            assert!(f1.eval(&e.z).norm() < 1e-12 && f2.eval(&e.z).norm() < 1e-12);
        }
    }

    #[test]
    fn double_root_is_not_certified() {
        let f = Form::from_terms(2, 2, vec![(vec![2, 0], c(1.0))]);
        let res = solve_square(&[f], 1);
        assert!(!res.complete);
    }
}
