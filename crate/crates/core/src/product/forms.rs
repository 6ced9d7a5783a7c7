//! Homogeneous polynomial forms in N variables.
//!
//! The constraint ⟨k, x^{⊗d}⟩ = 0 for a symmetric kernel vector k is the
//! degree-d form Σ_α c_α x^α with c_α the sum of k over the orbit of α.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::linalg::RVec;
use crate::tensors::digits;

#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    n: usize,
    degree: usize,
    /// (exponent vector, coefficient)
    terms: Vec<(Vec<u32>, Complex64)>,
}

impl Form {
    pub fn from_terms(n: usize, degree: usize, terms: Vec<(Vec<u32>, Complex64)>) -> Self {
        debug_assert!(terms.iter().all(|(e, _)| e.len() == n && e.iter().sum::<u32>() as usize == degree));
        Form { n, degree, terms }
    }

    /// Form z ↦ ⟨k, z^{⊗d}⟩ for a real vector k of length nᵈ.
    pub fn from_tensor(k: &RVec, n: usize, d: usize) -> Self {
        let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
        for (i, &v) in k.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let mut e = vec![0u32; n];
            for j in digits(i, n, d) {
                e[j] += 1;
            }
            *acc.entry(e).or_insert(0.0) += v;
        }
        let terms = acc.into_iter().map(|(e, c)| (e, Complex64::new(c, 0.0))).collect();
        Form { n, degree: d, terms }
    }

    pub fn vars(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn terms(&self) -> &[(Vec<u32>, Complex64)] {
        &self.terms
    }

    pub fn combine(forms: &[Form], coeffs: &[Complex64]) -> Form {
        let mut acc: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (f, &c) in forms.iter().zip(coeffs) {
            for (e, v) in &f.terms {
                *acc.entry(e.clone()).or_insert(Complex64::new(0.0, 0.0)) += v * c;
            }
        }
        Form { n: forms[0].n, degree: forms[0].degree, terms: acc.into_iter().collect() }
    }

    fn powers(&self, z: &[Complex64]) -> Vec<Vec<Complex64>> {
        z.iter()
            .map(|&zi| {
                let mut p = Vec::with_capacity(self.degree + 1);
                p.push(Complex64::new(1.0, 0.0));
                for k in 0..self.degree {
                    let last = p[k];
                    p.push(last * zi);
                }
                p
            })
            .collect()
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        let pw = self.powers(z);
        self.terms
            .iter()
            .map(|(e, c)| e.iter().enumerate().fold(*c, |acc, (j, &k)| acc * pw[j][k as usize]))
            .sum()
    }

    /// Value and gradient.
    pub fn eval_grad(&self, z: &[Complex64]) -> (Complex64, Vec<Complex64>) {
        let pw = self.powers(z);
        let zero = Complex64::new(0.0, 0.0);
        let mut val = zero;
        let mut grad = vec![zero; self.n];
        for (e, c) in &self.terms {
            val += e.iter().enumerate().fold(*c, |acc, (j, &k)| acc * pw[j][k as usize]);
            for j in 0..self.n {
                if e[j] == 0 {
                    continue;
                }
                let mut t = *c * e[j] as f64 * pw[j][e[j] as usize - 1];
                for (l, &k) in e.iter().enumerate() {
                    if l != j {
                        t *= pw[l][k as usize];
                    }
                }
                grad[j] += t;
            }
        }
        (val, grad)
    }

    /// Real evaluation for real coefficients (imaginary parts are ignored).
    pub fn eval_grad_real(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let (v, g) = self.eval_grad(&z);
        (v.re, g.iter().map(|c| c.re).collect())
    }
}
