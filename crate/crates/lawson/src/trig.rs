//! Exact symbolic algebra for the small function class
//! f(t, x) = sum_m p_m(x) cos(m (x+t)) + q_m(x) sin(m (x+t))
//! with polynomial coefficients. The class is closed under addition,
//! multiplication and both partial derivatives, which is what lets
//! manufactured problems carry machine-exact forcing terms and every mixed
//! derivative the boundary corrections ask for.

use std::collections::BTreeMap;

/// Dense univariate polynomial, coefficients in ascending degree order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: f64) -> Self {
        if c == 0.0 {
            Poly::zero()
        } else {
            Poly(vec![c])
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    fn trim(mut self) -> Self {
        while self.0.last() == Some(&0.0) {
            self.0.pop();
        }
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly::zero();
        }
        Poly(
            self.0[1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| (i + 1) as f64 * c)
                .collect(),
        )
        .trim()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let mut out = vec![0.0; n];
        for (i, &c) in self.0.iter().enumerate() {
            out[i] += c;
        }
        for (i, &c) in other.0.iter().enumerate() {
            out[i] += c;
        }
        Poly(out).trim()
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly(self.0.iter().map(|&c| s * c).collect()).trim()
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out).trim()
    }
}

/// Trigonometric polynomial in the traveling phase x+t with polynomial
/// amplitudes; harmonic m holds the pair (p_m, q_m).
#[derive(Debug, Clone, Default)]
pub struct TrigPoly {
    terms: BTreeMap<usize, (Poly, Poly)>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        TrigPoly::default()
    }

    /// p(x) * cos(m (x+t)).
    pub fn cos_term(m: usize, p: Poly) -> Self {
        let mut t = TrigPoly::zero();
        t.accumulate(m, p, Poly::zero());
        t
    }

    /// q(x) * sin(m (x+t)); m = 0 is identically zero.
    pub fn sin_term(m: usize, q: Poly) -> Self {
        let mut t = TrigPoly::zero();
        t.accumulate(m, Poly::zero(), q);
        t
    }

    /// Plain polynomial in x (harmonic zero).
    pub fn poly(p: Poly) -> Self {
        TrigPoly::cos_term(0, p)
    }

    fn accumulate(&mut self, m: usize, p: Poly, q: Poly) {
        let q = if m == 0 { Poly::zero() } else { q };
        if p.is_zero() && q.is_zero() {
            return;
        }
        let entry = self
            .terms
            .entry(m)
            .or_insert_with(|| (Poly::zero(), Poly::zero()));
        entry.0 = entry.0.add(&p);
        entry.1 = entry.1.add(&q);
    }

    fn normalized(mut self) -> Self {
        self.terms.retain(|_, (p, q)| !(p.is_zero() && q.is_zero()));
        self
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        let theta = x + t;
        self.terms
            .iter()
            .map(|(&m, (p, q))| {
                let (s, c) = (m as f64 * theta).sin_cos();
                p.eval(x) * c + q.eval(x) * s
            })
            .sum()
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        for (&m, (p, q)) in &other.terms {
            out.accumulate(m, p.clone(), q.clone());
        }
        out.normalized()
    }

    pub fn scale(&self, s: f64) -> TrigPoly {
        let mut out = TrigPoly::zero();
        for (&m, (p, q)) in &self.terms {
            out.accumulate(m, p.scale(s), q.scale(s));
        }
        out.normalized()
    }

    pub fn sub(&self, other: &TrigPoly) -> TrigPoly {
        self.add(&other.scale(-1.0))
    }

    /// d/dt: the phase rotates, amplitudes are untouched.
    pub fn dt(&self) -> TrigPoly {
        let mut out = TrigPoly::zero();
        for (&m, (p, q)) in &self.terms {
            let mf = m as f64;
            out.accumulate(m, q.scale(mf), p.scale(-mf));
        }
        out.normalized()
    }

    /// d/dx: product rule over amplitude and phase.
    pub fn dx(&self) -> TrigPoly {
        let mut out = TrigPoly::zero();
        for (&m, (p, q)) in &self.terms {
            let mf = m as f64;
            out.accumulate(m, p.derivative().add(&q.scale(mf)), q.derivative().add(&p.scale(-mf)));
        }
        out.normalized()
    }

    /// Product via the product-to-sum identities; harmonics combine into
    /// m+n and |m-n|.
    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let mut out = TrigPoly::zero();
        for (&a, (pa, qa)) in &self.terms {
            for (&b, (pb, qb)) in &other.terms {
                let sum = a + b;
                let diff = a.abs_diff(b);
                let cc = pa.mul(pb).scale(0.5);
                out.accumulate(sum, cc.clone(), Poly::zero());
                out.accumulate(diff, cc, Poly::zero());
                let ss = qa.mul(qb).scale(0.5);
                out.accumulate(sum, ss.scale(-1.0), Poly::zero());
                out.accumulate(diff, ss, Poly::zero());
                // sin(a th) cos(b th) and cos(a th) sin(b th); the difference
                // harmonic flips sign when the sine index is the smaller one.
                let sc = qa.mul(pb).scale(0.5);
                out.accumulate(sum, Poly::zero(), sc.clone());
                if a != b {
                    let sgn = if a > b { 1.0 } else { -1.0 };
                    out.accumulate(diff, Poly::zero(), sc.scale(sgn));
                }
                let cs = pa.mul(qb).scale(0.5);
                out.accumulate(sum, Poly::zero(), cs.clone());
                if a != b {
                    let sgn = if b > a { 1.0 } else { -1.0 };
                    out.accumulate(diff, Poly::zero(), cs.scale(sgn));
                }
            }
        }
        out.normalized()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}
