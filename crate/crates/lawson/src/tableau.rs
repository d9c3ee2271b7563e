//! Explicit Runge-Kutta tableaus underlying the Lawson schemes. Coefficients
//! are stored as exact rationals and rendered to f64 on construction.

use crate::error::{Error, Result};

/// Exact rational coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational(pub i64, pub i64);

impl Rational {
    pub fn as_f64(self) -> f64 {
        self.0 as f64 / self.1 as f64
    }
}

fn r(n: i64, d: i64) -> Rational {
    Rational(n, d)
}

/// Explicit Butcher tableau: `a` holds the strictly lower triangle, row i
/// listing a_{i,0}..a_{i,i-1}.
#[derive(Debug, Clone)]
pub struct ButcherTableau {
    pub name: String,
    pub c: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

/// Row-sum / consistency tolerance for rendered rational coefficients.
const CONSISTENCY_TOL: f64 = 1e-15;

/// Order-condition residual tolerance.
const ORDER_TOL: f64 = 1e-12;

impl ButcherTableau {
    pub fn from_rationals(
        name: &str,
        c: &[Rational],
        a: &[&[Rational]],
        b: &[Rational],
    ) -> Result<ButcherTableau> {
        let t = ButcherTableau {
            name: name.to_string(),
            c: c.iter().map(|x| x.as_f64()).collect(),
            a: a.iter().map(|row| row.iter().map(|x| x.as_f64()).collect()).collect(),
            b: b.iter().map(|x| x.as_f64()).collect(),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn stages(&self) -> usize {
        self.c.len()
    }

    /// Checks shape, c_1 = 0, sum(b) = 1 and the row-sum condition
    /// sum_j a_ij = c_i.
    pub fn validate(&self) -> Result<()> {
        let s = self.c.len();
        if self.b.len() != s || self.a.len() != s {
            return Err(Error::InvalidConfig(format!(
                "tableau `{}`: inconsistent stage counts",
                self.name
            )));
        }
        for (i, row) in self.a.iter().enumerate() {
            if row.len() != i {
                return Err(Error::InvalidConfig(format!(
                    "tableau `{}`: row {} must have {} entries",
                    self.name, i, i
                )));
            }
        }
        if self.c[0] != 0.0 {
            return Err(Error::InvalidConfig(format!(
                "tableau `{}`: c_1 must be 0",
                self.name
            )));
        }
        let bsum: f64 = self.b.iter().sum();
        if (bsum - 1.0).abs() > CONSISTENCY_TOL {
            return Err(Error::InvalidConfig(format!(
                "tableau `{}`: sum(b) = {bsum}, expected 1",
                self.name
            )));
        }
        for i in 0..s {
            let rsum: f64 = self.a[i].iter().sum();
            if (rsum - self.c[i]).abs() > CONSISTENCY_TOL {
                return Err(Error::InvalidConfig(format!(
                    "tableau `{}`: row {} sums to {rsum}, c = {}",
                    self.name, i, self.c[i]
                )));
            }
        }
        Ok(())
    }

    /// Highest p <= 4 whose cumulative order conditions hold to 1e-12.
    pub fn classical_order(&self) -> usize {
        let s = self.stages();
        let b = &self.b;
        let c = &self.c;
        let a = |i: usize, j: usize| -> f64 {
            if j < i {
                self.a[i][j]
            } else {
                0.0
            }
        };
        let sum = |f: &dyn Fn(usize) -> f64| -> f64 { (0..s).map(f).sum() };

        let cond1 = (sum(&|i| b[i]) - 1.0).abs() <= ORDER_TOL;
        if !cond1 {
            return 0;
        }
        let cond2 = (sum(&|i| b[i] * c[i]) - 0.5).abs() <= ORDER_TOL;
        if !cond2 {
            return 1;
        }
        let ac: Vec<f64> = (0..s).map(|i| (0..s).map(|j| a(i, j) * c[j]).sum()).collect();
        let cond3 = (sum(&|i| b[i] * c[i] * c[i]) - 1.0 / 3.0).abs() <= ORDER_TOL
            && (sum(&|i| b[i] * ac[i]) - 1.0 / 6.0).abs() <= ORDER_TOL;
        if !cond3 {
            return 2;
        }
        let ac2: Vec<f64> = (0..s)
            .map(|i| (0..s).map(|j| a(i, j) * c[j] * c[j]).sum())
            .collect();
        let aac: Vec<f64> = (0..s).map(|i| (0..s).map(|j| a(i, j) * ac[j]).sum()).collect();
        let cond4 = (sum(&|i| b[i] * c[i] * c[i] * c[i]) - 0.25).abs() <= ORDER_TOL
            && (sum(&|i| b[i] * c[i] * ac[i]) - 0.125).abs() <= ORDER_TOL
            && (sum(&|i| b[i] * ac2[i]) - 1.0 / 12.0).abs() <= ORDER_TOL
            && (sum(&|i| b[i] * aac[i]) - 1.0 / 24.0).abs() <= ORDER_TOL;
        if !cond4 {
            return 3;
        }
        4
    }
}

/// Midpoint-free two-stage order-2 scheme (explicit trapezoid).
pub fn rk2() -> ButcherTableau {
    ButcherTableau::from_rationals(
        "rk2",
        &[r(0, 1), r(1, 1)],
        &[&[], &[r(1, 1)]],
        &[r(1, 2), r(1, 2)],
    )
    .expect("built-in tableau")
}

/// Heun's three-stage order-3 scheme.
pub fn heun3() -> ButcherTableau {
    ButcherTableau::from_rationals(
        "heun3",
        &[r(0, 1), r(1, 3), r(2, 3)],
        &[&[], &[r(1, 3)], &[r(0, 1), r(2, 3)]],
        &[r(1, 4), r(0, 1), r(3, 4)],
    )
    .expect("built-in tableau")
}

/// The 3/8-rule four-stage order-4 scheme.
pub fn rk4() -> ButcherTableau {
    ButcherTableau::from_rationals(
        "rk4",
        &[r(0, 1), r(1, 3), r(2, 3), r(1, 1)],
        &[
            &[],
            &[r(1, 3)],
            &[r(-1, 3), r(1, 1)],
            &[r(1, 1), r(-1, 1), r(1, 1)],
        ],
        &[r(1, 8), r(3, 8), r(3, 8), r(1, 8)],
    )
    .expect("built-in tableau")
}

/// Looks up a built-in tableau by name.
pub fn builtin(name: &str) -> Result<ButcherTableau> {
    match name {
        "rk2" => Ok(rk2()),
        "heun3" => Ok(heun3()),
        "rk4" => Ok(rk4()),
        _ => Err(Error::UnknownName {
            kind: "tableau",
            name: name.to_string(),
        }),
    }
}

/// Built-in tableau names.
pub fn builtin_names() -> &'static [&'static str] {
    &["rk2", "heun3", "rk4"]
}
