//! Manufactured reaction-diffusion problems
//! u_t = u_xx + phi(u) + h(t, x) on (0, 1)
//! with known closed-form solutions. Each problem carries the reaction and
//! its derivatives, the forcing with every mixed derivative that the
//! boundary-corrected schemes consume, the boundary data with three time
//! derivatives, and the exact solution for error measurement.

use std::sync::Arc;

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::space::{BcKind, DiscreteSpace, Side};
use crate::trig::{Poly, TrigPoly};

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Reaction term phi and its first four derivatives.
#[derive(Clone)]
pub struct ReactionSpec {
    pub name: &'static str,
    pub phi: ScalarFn,
    pub dphi: ScalarFn,
    pub d2phi: ScalarFn,
    pub d3phi: ScalarFn,
    pub d4phi: ScalarFn,
}

impl ReactionSpec {
    pub fn square() -> Self {
        ReactionSpec {
            name: "square",
            phi: Arc::new(|u| u * u),
            dphi: Arc::new(|u| 2.0 * u),
            d2phi: Arc::new(|_| 2.0),
            d3phi: Arc::new(|_| 0.0),
            d4phi: Arc::new(|_| 0.0),
        }
    }

    pub fn zero() -> Self {
        ReactionSpec {
            name: "zero",
            phi: Arc::new(|_| 0.0),
            dphi: Arc::new(|_| 0.0),
            d2phi: Arc::new(|_| 0.0),
            d3phi: Arc::new(|_| 0.0),
            d4phi: Arc::new(|_| 0.0),
        }
    }

    /// Symbolic image of the reaction applied to a trig polynomial, used
    /// when manufacturing forcings. Only reactions polynomial in u close
    /// over the class.
    fn apply_symbolic(&self, u: &TrigPoly) -> Result<TrigPoly> {
        match self.name {
            "square" => Ok(u.mul(u)),
            "zero" => Ok(TrigPoly::zero()),
            other => Err(Error::Unsupported(format!(
                "cannot manufacture forcing for reaction `{other}`"
            ))),
        }
    }
}

/// Forcing h and the mixed derivatives the corrected schemes trace at the
/// boundary: up to t-order 2 and x-order 4.
#[derive(Clone)]
pub struct ForcingSpec {
    pub h: SpaceTimeFn,
    pub h_t: SpaceTimeFn,
    pub h_tt: SpaceTimeFn,
    pub h_x: SpaceTimeFn,
    pub h_tx: SpaceTimeFn,
    pub h_xx: SpaceTimeFn,
    pub h_txx: SpaceTimeFn,
    pub h_xxx: SpaceTimeFn,
    pub h_xxxx: SpaceTimeFn,
}

fn closure_of(f: TrigPoly) -> SpaceTimeFn {
    Arc::new(move |t, x| f.eval(t, x))
}

impl ForcingSpec {
    pub fn zero() -> Self {
        ForcingSpec::from_trig(&TrigPoly::zero())
    }

    pub fn from_trig(h: &TrigPoly) -> Self {
        let hx = h.dx();
        let hxx = hx.dx();
        let hxxx = hxx.dx();
        let ht = h.dt();
        ForcingSpec {
            h: closure_of(h.clone()),
            h_t: closure_of(ht.clone()),
            h_tt: closure_of(ht.dt()),
            h_x: closure_of(hx.clone()),
            h_tx: closure_of(hx.dt()),
            h_xx: closure_of(hxx.clone()),
            h_txx: closure_of(hxx.dt()),
            h_xxx: closure_of(hxxx.clone()),
            h_xxxx: closure_of(hxxx.dx()),
        }
    }
}

/// Boundary data at one endpoint with its first three time derivatives.
/// For Dirichlet the datum is the value trace; for Neumann it is the
/// x-derivative trace.
#[derive(Clone)]
pub struct BoundaryData {
    pub kind: BcKind,
    pub g: TimeFn,
    pub g_dot: TimeFn,
    pub g_ddot: TimeFn,
    pub g_dddot: TimeFn,
}

fn restrict(f: &TrigPoly, x: f64) -> TimeFn {
    let f = f.clone();
    Arc::new(move |t| f.eval(t, x))
}

impl BoundaryData {
    pub fn zero(kind: BcKind) -> Self {
        let z: TimeFn = Arc::new(|_| 0.0);
        BoundaryData {
            kind,
            g: z.clone(),
            g_dot: z.clone(),
            g_ddot: z.clone(),
            g_dddot: z,
        }
    }

    pub fn from_solution(u: &TrigPoly, side: Side, kind: BcKind) -> Self {
        let x = side.coordinate();
        let traced = match kind {
            BcKind::Dirichlet => u.clone(),
            BcKind::Neumann => u.dx(),
            BcKind::Robin { alpha, beta } => u.scale(alpha).add(&u.dx().scale(beta)),
        };
        let d1 = traced.dt();
        let d2 = d1.dt();
        let d3 = d2.dt();
        BoundaryData {
            kind,
            g: restrict(&traced, x),
            g_dot: restrict(&d1, x),
            g_ddot: restrict(&d2, x),
            g_dddot: restrict(&d3, x),
        }
    }
}

/// Exact solution and the derivatives used as boundary oracles and for
/// error measurement.
#[derive(Clone)]
pub struct SolutionSpec {
    pub u: SpaceTimeFn,
    pub u_t: SpaceTimeFn,
    pub u_x: SpaceTimeFn,
    pub u_tx: SpaceTimeFn,
}

impl SolutionSpec {
    pub fn from_trig(u: &TrigPoly) -> Self {
        let ut = u.dt();
        let ux = u.dx();
        SolutionSpec {
            u: closure_of(u.clone()),
            u_t: closure_of(ut.clone()),
            u_x: closure_of(ux.clone()),
            u_tx: closure_of(ux.dt()),
        }
    }
}

/// A fully specified initial-boundary-value problem with known solution.
#[derive(Clone)]
pub struct ManufacturedProblem {
    pub name: String,
    pub reaction: ReactionSpec,
    pub forcing: ForcingSpec,
    /// Left (x=0) and right (x=1) boundary data.
    pub boundary: [BoundaryData; 2],
    pub solution: SolutionSpec,
}

impl ManufacturedProblem {
    /// Assembles a problem from independently supplied parts; the caller
    /// vouches for their mutual consistency.
    pub fn from_parts(
        name: impl Into<String>,
        reaction: ReactionSpec,
        forcing: ForcingSpec,
        boundary: [BoundaryData; 2],
        solution: SolutionSpec,
    ) -> Self {
        ManufacturedProblem {
            name: name.into(),
            reaction,
            forcing,
            boundary,
            solution,
        }
    }

    /// Manufactures the forcing h = u_t - u_xx - phi(u) so that `u` solves
    /// the PDE exactly, and derives boundary data of the requested kinds.
    pub fn manufacture(
        name: impl Into<String>,
        u: &TrigPoly,
        reaction: ReactionSpec,
        kinds: [BcKind; 2],
    ) -> Result<Self> {
        let phi_u = reaction.apply_symbolic(u)?;
        let h = u.dt().sub(&u.dx().dx()).sub(&phi_u);
        Ok(ManufacturedProblem {
            name: name.into(),
            reaction,
            forcing: ForcingSpec::from_trig(&h),
            boundary: [
                BoundaryData::from_solution(u, Side::Left, kinds[0]),
                BoundaryData::from_solution(u, Side::Right, kinds[1]),
            ],
            solution: SolutionSpec::from_trig(u),
        })
    }

    /// Boundary data pair at time t.
    pub fn trace_pair(&self, t: f64) -> [f64; 2] {
        [(self.boundary[0].g)(t), (self.boundary[1].g)(t)]
    }

    pub fn initial_state(&self, space: &DiscreteSpace) -> Array1<f64> {
        space.project(|x| (self.solution.u)(0.0, x))
    }

    pub fn exact_state(&self, space: &DiscreteSpace, t: f64) -> Array1<f64> {
        space.project(|x| (self.solution.u)(t, x))
    }

    /// Nodewise nonlinearity f(t, U) = phi(U) + h(t, x).
    pub fn nonlinear_rhs(
        &self,
        space: &DiscreteSpace,
        t: f64,
        u: &Array1<f64>,
    ) -> Array1<f64> {
        let phi = &self.reaction.phi;
        let h = &self.forcing.h;
        Array1::from_iter(
            u.iter()
                .zip(&space.grid.nodes)
                .map(|(&ui, &xi)| phi(ui) + h(t, xi)),
        )
    }

    /// Full semidiscrete right-hand side A_h0 U + C_h g(t) + f(t, U).
    pub fn semidiscrete_rhs(
        &self,
        space: &DiscreteSpace,
        t: f64,
        u: &Array1<f64>,
    ) -> Array1<f64> {
        let g = self.trace_pair(t);
        let mut out = space.apply_op(u);
        out += &space.apply_coupling(g[0], g[1]);
        out += &self.nonlinear_rhs(space, t, u);
        out
    }
}

/// Named catalogue of the built-in problems.
pub fn registry(name: &str) -> Result<ManufacturedProblem> {
    // All three share the reaction phi(u) = u^2 and a traveling-wave type
    // solution; they differ in boundary kinds and whether traces vanish.
    match name {
        // u = x (x - 1) cos(x + t): both Dirichlet traces identically zero.
        "dirichlet-vanishing" => ManufacturedProblem::manufacture(
            name,
            &TrigPoly::cos_term(1, Poly(vec![0.0, -1.0, 1.0])),
            ReactionSpec::square(),
            [BcKind::Dirichlet, BcKind::Dirichlet],
        ),
        // u = cos(x + t): non-vanishing Dirichlet traces at both ends.
        "dirichlet-nonvanishing" => ManufacturedProblem::manufacture(
            name,
            &TrigPoly::cos_term(1, Poly(vec![1.0])),
            ReactionSpec::square(),
            [BcKind::Dirichlet, BcKind::Dirichlet],
        ),
        // u = cos(x + t) with a value trace at x=0 and a flux trace at x=1.
        "mixed-nonvanishing" => ManufacturedProblem::manufacture(
            name,
            &TrigPoly::cos_term(1, Poly(vec![1.0])),
            ReactionSpec::square(),
            [BcKind::Dirichlet, BcKind::Neumann],
        ),
        other => Err(Error::UnknownName {
            kind: "problem",
            name: other.to_string(),
        }),
    }
}

pub fn problem_names() -> &'static [&'static str] {
    &[
        "dirichlet-vanishing",
        "dirichlet-nonvanishing",
        "mixed-nonvanishing",
    ]
}

/// Test fixture: u = sin(pi x) e^{-t} with phi(u) = u^2. Both boundary
/// values AND the forcing vanish at the endpoints, so every trace the
/// corrected schemes inject is identically zero — on this problem a
/// correction must be exactly inert. Not part of the named catalogue.
pub fn zero_trace_problem() -> ManufacturedProblem {
    use std::f64::consts::PI;
    let p2 = PI * PI;
    let u = |t: f64, x: f64| (PI * x).sin() * (-t).exp();
    let h = move |t: f64, x: f64| {
        (p2 - 1.0) * (PI * x).sin() * (-t).exp() - ((PI * x).sin() * (-t).exp()).powi(2)
    };
    let forcing = ForcingSpec {
        h: Arc::new(h),
        h_t: Arc::new(move |t, x| {
            -(p2 - 1.0) * (PI * x).sin() * (-t).exp()
                + 2.0 * ((PI * x).sin() * (-t).exp()).powi(2)
        }),
        h_tt: Arc::new(move |t, x| {
            (p2 - 1.0) * (PI * x).sin() * (-t).exp()
                - 4.0 * ((PI * x).sin() * (-t).exp()).powi(2)
        }),
        h_x: Arc::new(move |t, x| {
            (p2 - 1.0) * PI * (PI * x).cos() * (-t).exp()
                - PI * (2.0 * PI * x).sin() * (-2.0 * t).exp()
        }),
        h_tx: Arc::new(move |t, x| {
            -(p2 - 1.0) * PI * (PI * x).cos() * (-t).exp()
                + 2.0 * PI * (2.0 * PI * x).sin() * (-2.0 * t).exp()
        }),
        h_xx: Arc::new(move |t, x| {
            -(p2 - 1.0) * p2 * (PI * x).sin() * (-t).exp()
                - 2.0 * p2 * (2.0 * PI * x).cos() * (-2.0 * t).exp()
        }),
        h_txx: Arc::new(move |t, x| {
            (p2 - 1.0) * p2 * (PI * x).sin() * (-t).exp()
                + 4.0 * p2 * (2.0 * PI * x).cos() * (-2.0 * t).exp()
        }),
        h_xxx: Arc::new(move |t, x| {
            -(p2 - 1.0) * p2 * PI * (PI * x).cos() * (-t).exp()
                + 4.0 * p2 * PI * (2.0 * PI * x).sin() * (-2.0 * t).exp()
        }),
        h_xxxx: Arc::new(move |t, x| {
            (p2 - 1.0) * p2 * p2 * (PI * x).sin() * (-t).exp()
                + 8.0 * p2 * p2 * (2.0 * PI * x).cos() * (-2.0 * t).exp()
        }),
    };
    let solution = SolutionSpec {
        u: Arc::new(u),
        u_t: Arc::new(move |t, x| -(PI * x).sin() * (-t).exp()),
        u_x: Arc::new(move |t, x| PI * (PI * x).cos() * (-t).exp()),
        u_tx: Arc::new(move |t, x| -PI * (PI * x).cos() * (-t).exp()),
    };
    ManufacturedProblem::from_parts(
        "zero-trace",
        ReactionSpec::square(),
        forcing,
        [
            BoundaryData::zero(BcKind::Dirichlet),
            BoundaryData::zero(BcKind::Dirichlet),
        ],
        solution,
    )
}
