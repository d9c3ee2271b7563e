//! Randomized invariant checks. Where the acceptance bundle pins each
//! structural property at a handful of representative points, these
//! properties let proptest hunt the parameter space: random stable
//! operators, step sizes across the Taylor/squaring seam, random boundary
//! times and random polynomial data. Tolerances are either roundoff-scaled
//! (exactness claims) or the gates the fixed-point checks use.

use std::sync::OnceLock;

use ndarray::{Array1, Array2};
use proptest::prelude::*;

use lawson::boundary::{bdf_time_first, bdf_time_second, compute_traces, BoundaryMode, TraceHistory};
use lawson::integrators::{Integrator, SchemeKind};
use lawson::linalg::{inf_norm_mat, inf_norm_vec, matmul};
use lawson::phi::{phi_family, phi_scalar, LinearPropagator, PhiRequest, PHI_MAX};
use lawson::problems::{registry, zero_trace_problem, ManufacturedProblem};
use lawson::space::{build_fd_dirichlet, build_fd_mixed, DiscreteSpace, Side};
use lawson::tableau::builtin;
use lawson::Error;

const INV_FACT6: [f64; 6] = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0, 1.0 / 120.0];

/// Step sizes coarse enough to keep cases cheap, fine enough to exercise
/// every grid the studies use.
const HS: [f64; 3] = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];

fn dirichlet_spaces() -> &'static [DiscreteSpace] {
    static SPACES: OnceLock<Vec<DiscreteSpace>> = OnceLock::new();
    SPACES.get_or_init(|| HS.iter().map(|&h| build_fd_dirichlet(h).unwrap()).collect())
}

fn mixed_spaces() -> &'static [DiscreteSpace] {
    static SPACES: OnceLock<Vec<DiscreteSpace>> = OnceLock::new();
    SPACES.get_or_init(|| HS.iter().map(|&h| build_fd_mixed(h).unwrap()).collect())
}

fn zero_trace() -> &'static ManufacturedProblem {
    static P: OnceLock<ManufacturedProblem> = OnceLock::new();
    P.get_or_init(zero_trace_problem)
}

/// Log-uniform positive draw, so small and large scales get equal weight.
fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

/// Symmetric tridiagonal with diag <= -1 and off-diagonal row sums < 1:
/// Gershgorin puts every eigenvalue in the stable half-plane.
fn stable_tridiag() -> impl Strategy<Value = Array2<f64>> {
    (2usize..=10).prop_flat_map(|n| {
        (
            prop::collection::vec(-4.0..-1.0f64, n),
            prop::collection::vec(-0.49..0.49f64, n - 1),
        )
            .prop_map(move |(d, o)| {
                let mut a = Array2::zeros((n, n));
                for i in 0..n {
                    a[[i, i]] = d[i];
                }
                for i in 0..n - 1 {
                    a[[i, i + 1]] = o[i];
                    a[[i + 1, i]] = o[i];
                }
                a
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// z phi_{j+1}(z) = phi_j(z) - 1/j! as an operator identity, across both
    /// the Taylor branch and the scaling-and-squaring branch.
    #[test]
    fn phi_recurrence_holds_on_random_stable_operators(
        a in stable_tridiag(),
        tau in log_uniform(1e-4, 2.0),
    ) {
        let n = a.nrows();
        let phis = phi_family(&a, tau, PHI_MAX).unwrap();
        let x = tau * &a;
        for j in 0..PHI_MAX {
            let mut resid = matmul(&x, &phis[j + 1]);
            resid = &resid - &phis[j];
            for i in 0..n {
                resid[[i, i]] += INV_FACT6[j];
            }
            prop_assert!(
                inf_norm_mat(&resid) <= 1e-10,
                "j={j} residual {:e}", inf_norm_mat(&resid)
            );
        }
    }

    /// On diagonal operators the matrix family must reproduce the scalar
    /// kernels entrywise; the two implementations share no code path beyond
    /// the Taylor series.
    #[test]
    fn matrix_phi_matches_scalar_phi_on_diagonal_operators(
        d in prop::collection::vec(-120.0..0.0f64, 2..=8),
        tau in log_uniform(1e-3, 1.5),
    ) {
        let n = d.len();
        let mut a = Array2::zeros((n, n));
        for i in 0..n {
            a[[i, i]] = d[i];
        }
        let phis = phi_family(&a, tau, PHI_MAX).unwrap();
        for j in 0..=PHI_MAX {
            for i in 0..n {
                let want = phi_scalar(tau * d[i], j).unwrap();
                let got = phis[j][[i, i]];
                // Squaring compounds rounding as eps*|z|; |z| <= 180 here.
                prop_assert!(
                    (got - want).abs() <= 1e-12 * want.abs().max(1e-30),
                    "j={j} z={:e}: matrix {got:e} vs scalar {want:e}", tau * d[i]
                );
            }
        }
    }

    /// The sine-transform backend and the dense backend are two unrelated
    /// algorithms for the same operator; on random vectors they must agree
    /// far below the schemes' accuracy floor.
    #[test]
    fn backends_agree_on_random_vectors(
        hi in 0usize..HS.len(),
        tau in log_uniform(1e-5, 5e-3),
        j in 0usize..=4,
        seed in prop::collection::vec(-1.0..1.0f64, 64),
    ) {
        let space = &dirichlet_spaces()[hi];
        let n = space.n();
        let v = Array1::from_shape_fn(n, |i| seed[i % seed.len()]);
        let dense = LinearPropagator::dense(space.op_dense()).unwrap();
        let s = space.propagator().apply(PhiRequest { tau, j }, &v).unwrap();
        let d = dense.apply(PhiRequest { tau, j }, &v).unwrap();
        let gap = inf_norm_vec(&(&s - &d));
        prop_assert!(gap <= 1e-10 * (1.0 + inf_norm_vec(&v)), "gap {gap:e}");
    }

    /// With boundary data and endpoint forcing both identically zero, every
    /// trace the order-2 correction injects vanishes, so its step must match
    /// the classical step to roundoff for any step size, grid and time.
    #[test]
    fn order2_correction_is_inert_when_all_traces_vanish(
        hi in 0usize..HS.len(),
        k in log_uniform(1e-3, 5e-2),
        t in 0.0..1.0f64,
    ) {
        let p = zero_trace();
        let space = &dirichlet_spaces()[hi];
        let tab = builtin("rk2").unwrap();
        let mk = |scheme| Integrator {
            problem: p,
            space,
            tableau: &tab,
            scheme,
            mode: BoundaryMode::ExactOracle,
        };
        let u = p.exact_state(space, t);
        let hist = TraceHistory::new();
        let a = mk(SchemeKind::Classical).step(t, k, &u, &hist).unwrap();
        let b = mk(SchemeKind::Corrected2).step(t, k, &u, &hist).unwrap();
        let diff = inf_norm_vec(&(&a - &b));
        prop_assert!(diff <= 1e-14 * (1.0 + inf_norm_vec(&u)), "diff {diff:e}");
    }

    /// At a Dirichlet endpoint the traced quantities are tied by
    /// (Au trace) + (f trace) = g'(t): the PDE restricted to the boundary.
    /// Holds at every time for every trace order, up to roundoff in the
    /// assembled terms.
    #[test]
    fn dirichlet_traces_satisfy_the_flow_identity(
        name in prop::sample::select(vec!["dirichlet-vanishing", "dirichlet-nonvanishing"]),
        oi in 0usize..3,
        t in 0.0..2.0f64,
    ) {
        let (order, tab_name) = [(2usize, "rk2"), (3, "heun3"), (4, "rk4")][oi];
        let p = registry(name).unwrap();
        let space = &dirichlet_spaces()[1];
        let tab = builtin(tab_name).unwrap();
        let hist = TraceHistory::new();
        let u = p.exact_state(space, t);
        let tr = compute_traces(order, &p, space, BoundaryMode::ExactOracle, &hist, &tab, t, 1e-2, &u).unwrap();
        for side in [Side::Left, Side::Right] {
            let s = side.index();
            let gd = (p.boundary[s].g_dot)(t);
            let scale = gd.abs() + tr.dau[s].abs() + tr.df0[s].abs();
            let resid = (tr.dau[s] + tr.df0[s] - gd).abs() / scale.max(1.0);
            prop_assert!(resid <= 4.0 * f64::EPSILON, "side {s} residual {resid:e}");
        }
    }

    /// The discrete diffusion semigroup never amplifies the max norm, for
    /// any step size on either grid family.
    #[test]
    fn semigroup_is_contractive_for_random_steps(
        hi in 0usize..HS.len(),
        mixed in prop::bool::ANY,
        tau in log_uniform(1e-5, 4.0),
    ) {
        let space = if mixed { &mixed_spaces()[hi] } else { &dirichlet_spaces()[hi] };
        let e = space.propagator().materialize(tau, 0).unwrap();
        let norm = inf_norm_mat(&e);
        prop_assert!(norm <= 1.0 + 1e-12, "||exp(tau A)||_inf = {norm}");
    }

    /// The backward 4-point stencils reproduce first and second derivatives
    /// of any cubic exactly, up to the cancellation their finite-difference
    /// weights incur.
    #[test]
    fn time_stencils_are_exact_on_random_cubics(
        c in prop::collection::vec(-10.0..10.0f64, 4),
        k in log_uniform(1e-3, 1.0),
        t0 in -2.0..2.0f64,
    ) {
        let p = |t: f64| ((c[3] * t + c[2]) * t + c[1]) * t + c[0];
        let dp = |t: f64| (3.0 * c[3] * t + 2.0 * c[2]) * t + c[1];
        let ddp = |t: f64| 6.0 * c[3] * t + 2.0 * c[2];
        let ts = [t0, t0 - k, t0 - 2.0 * k, t0 - 3.0 * k];
        let y = ts.map(p);
        // Each sample carries rounding proportional to its evaluation
        // magnitude (the Horner pass over |c|), not to the possibly
        // cancelled value p(t) itself.
        let pabs = |t: f64| {
            let a = t.abs();
            ((c[3].abs() * a + c[2].abs()) * a + c[1].abs()) * a + c[0].abs()
        };
        let mag: f64 = ts.map(pabs).iter().sum();
        let tol1 = (8.0 * mag / k * f64::EPSILON).max(f64::EPSILON);
        let tol2 = (8.0 * mag / (k * k) * f64::EPSILON).max(f64::EPSILON);
        prop_assert!((bdf_time_first(y, k) - dp(t0)).abs() <= tol1);
        prop_assert!((bdf_time_second(y, k) - ddp(t0)).abs() <= tol2);
    }

    /// The one-sided boundary-derivative stencils are three-point formulas,
    /// hence exact on quadratics at both endpoints.
    #[test]
    fn space_stencils_are_exact_on_random_quadratics(
        hi in 0usize..HS.len(),
        a in -5.0..5.0f64,
        b in -5.0..5.0f64,
        c in -5.0..5.0f64,
    ) {
        let q = |x: f64| (a * x + b) * x + c;
        let dq = |x: f64| 2.0 * a * x + b;
        let space = &dirichlet_spaces()[hi];
        let u = space.project(q);
        let mag = a.abs() + b.abs() + c.abs();
        let tol = 32.0 * f64::EPSILON * mag.max(1.0) / HS[hi];
        for (side, xe) in [(Side::Left, 0.0), (Side::Right, 1.0)] {
            let got = space.stencil(side).apply(q(0.0), q(1.0), &u);
            prop_assert!((got - dq(xe)).abs() <= tol, "{side:?}: {got} vs {}", dq(xe));
        }
    }

    /// Trace differentiation needs four snapshots at the current spacing;
    /// shorter or unevenly spaced histories must be rejected, full ones
    /// accepted.
    #[test]
    fn history_window_enforces_depth_and_spacing(
        k in log_uniform(1e-4, 1.0),
        t0 in -1.0..1.0f64,
        vals in prop::collection::vec(-3.0..3.0f64, 12),
        jitter in 1e-3..0.5f64,
    ) {
        let state = |j: usize| Array1::from_vec(vals[3 * j..3 * j + 3].to_vec());
        let mut h = TraceHistory::new();
        for j in 0..3 {
            h.push(t0 + j as f64 * k, state(j));
        }
        let short = matches!(h.node_dot(0, k), Err(Error::InsufficientHistory { .. }));
        prop_assert!(short, "depth-3 history was not rejected");
        h.push(t0 + 3.0 * k, state(3));
        prop_assert!(h.node_dot(0, k).unwrap().is_finite());
        prop_assert!(h.vector_dot(k).is_ok());
        prop_assert!(h.node_ddot(2, k).is_ok());
        // Querying with a step the snapshots were not taken at is an error.
        prop_assert!(matches!(h.node_dot(0, k * (1.0 + jitter)), Err(Error::InvalidConfig(_))));
        // So is pushing a snapshot off the uniform time ladder.
        h.push(t0 + (4.0 + jitter) * k, state(0));
        prop_assert!(h.vector_dot(k).is_err());
    }

    /// Operators with non-finite entries are rejected up front instead of
    /// propagating NaNs into the family.
    #[test]
    fn phi_family_rejects_non_finite_operators(
        a in stable_tridiag(),
        poison in prop::sample::select(vec![f64::NAN, f64::INFINITY, f64::NEG_INFINITY]),
        pick in prop::num::u64::ANY,
    ) {
        let n = a.nrows();
        let mut bad = a;
        let i = (pick as usize) % n;
        let j = ((pick >> 32) as usize) % n;
        bad[[i, j]] = poison;
        prop_assert!(matches!(phi_family(&bad, 1.0, PHI_MAX), Err(Error::NonFinite(_))));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Time stepping only accepts steps that tile the horizon exactly; a
    /// divisor runs the advertised number of steps, anything else is
    /// rejected before work starts.
    #[test]
    fn integration_horizon_must_be_a_multiple_of_the_step(
        n in 1usize..=20,
        delta in 0.05..0.45f64,
    ) {
        let p = registry("dirichlet-vanishing").unwrap();
        let space = &dirichlet_spaces()[0];
        let tab = builtin("rk2").unwrap();
        let it = Integrator {
            problem: &p,
            space,
            tableau: &tab,
            scheme: SchemeKind::Classical,
            mode: BoundaryMode::ExactOracle,
        };
        let t_end = 0.5;
        let k = t_end / n as f64;
        let ev = it.integrate(k, t_end).unwrap();
        prop_assert_eq!(ev.steps, n);

        let off = k * (1.0 + delta);
        let m = (t_end / off).round();
        prop_assume!((m * off - t_end).abs() > 1e-8 * t_end);
        prop_assert!(matches!(it.integrate(off, t_end), Err(Error::InvalidConfig(_))));
    }
}
