//! Reduction of three letter terms to two with the same term sum.
//!
//! Given letter triples `t1, t2, t3` whose component sums stay within the
//! unit interval, the solver looks for `(α, β, γ)` such that the two
//! synthesized triples
//!
//! ```text
//! tx = (p1 + p3/2 + α,  q1 + q3/2 + β,  r1 + r3/2 + γ)
//! ty = (p2 + p3/2 − α,  q2 + q3/2 − β,  r2 + r3/2 − γ)
//! ```
//!
//! satisfy `T(tx) + T(ty) = T(t1) + T(t2) + T(t3)` with all six coordinates
//! inside `[0, 1]`. Component sums are conserved by construction, so the
//! equality constraint reduces to a single residual that is continuous in
//! `(α, β, γ)`: one equation in three unknowns. The solver grids two of them
//! and isolates a root of the third by bracketing and bisection.

use serde::{Deserialize, Serialize};

use crate::triangle::letter_term_raw;
use crate::{Error, KParam, LetterTriple};

const SUM_TOLERANCE: f64 = 1e-9;
/// Bisection stops once the bracket is this narrow.
const BRACKET_WIDTH: f64 = 1e-12;

/// A three-term reduction instance: the triples, the exponent, and the term
/// sum the synthesized pair has to reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionProblem {
    pub t1: LetterTriple,
    pub t2: LetterTriple,
    pub t3: LetterTriple,
    pub k: KParam,
    pub target: f64,
}

/// Builds a problem after checking the component sum bounds; the target is
/// the sum of the three letter terms.
pub fn build_problem(
    t1: LetterTriple,
    t2: LetterTriple,
    t3: LetterTriple,
    k: KParam,
) -> Result<ReductionProblem, Error> {
    let sums = [
        ('p', t1.p + t2.p + t3.p),
        ('q', t1.q + t2.q + t3.q),
        ('r', t1.r + t2.r + t3.r),
    ];
    for (component, sum) in sums {
        if !(-SUM_TOLERANCE..=1.0 + SUM_TOLERANCE).contains(&sum) {
            return Err(Error::SumOutOfRange { component, sum });
        }
    }
    let kv = k.get();
    let target = letter_term_raw(t1.p, t1.q, t1.r, kv)
        + letter_term_raw(t2.p, t2.q, t2.r, kv)
        + letter_term_raw(t3.p, t3.q, t3.r, kv);
    Ok(ReductionProblem { t1, t2, t3, k, target })
}

/// A concrete `(α, β, γ)` with its synthesized triples. The triples may leave
/// the unit box; [`feasible`] reports whether they do.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionCandidate {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub tx: LetterTriple,
    pub ty: LetterTriple,
}

impl ReductionProblem {
    pub fn candidate(&self, alpha: f64, beta: f64, gamma: f64) -> ReductionCandidate {
        ReductionCandidate {
            alpha,
            beta,
            gamma,
            tx: LetterTriple {
                p: self.t1.p + 0.5 * self.t3.p + alpha,
                q: self.t1.q + 0.5 * self.t3.q + beta,
                r: self.t1.r + 0.5 * self.t3.r + gamma,
            },
            ty: LetterTriple {
                p: self.t2.p + 0.5 * self.t3.p - alpha,
                q: self.t2.q + 0.5 * self.t3.q - beta,
                r: self.t2.r + 0.5 * self.t3.r - gamma,
            },
        }
    }

    /// `T(tx) + T(ty) − target` for the candidate at `(α, β, γ)`. Defined for
    /// infeasible candidates too, so roots can be bracketed across the box.
    pub fn residual(&self, alpha: f64, beta: f64, gamma: f64) -> f64 {
        let c = self.candidate(alpha, beta, gamma);
        let kv = self.k.get();
        letter_term_raw(c.tx.p, c.tx.q, c.tx.r, kv) + letter_term_raw(c.ty.p, c.ty.q, c.ty.r, kv)
            - self.target
    }

    /// Interval of the free parameter keeping both derived coordinates of its
    /// component inside `[0, 1]`; `None` when the box constraints leave no
    /// room.
    fn axis_interval(&self, axis: FreeAxis) -> Option<(f64, f64)> {
        let (plus_base, minus_base) = match axis {
            FreeAxis::Alpha => (self.t1.p + 0.5 * self.t3.p, self.t2.p + 0.5 * self.t3.p),
            FreeAxis::Beta => (self.t1.q + 0.5 * self.t3.q, self.t2.q + 0.5 * self.t3.q),
            FreeAxis::Gamma => (self.t1.r + 0.5 * self.t3.r, self.t2.r + 0.5 * self.t3.r),
        };
        let lo = (-plus_base).max(minus_base - 1.0);
        let hi = (1.0 - plus_base).min(minus_base);
        (lo <= hi).then_some((lo, hi))
    }
}

/// True iff all six derived coordinates lie in `[0, 1]`; the sum constraints
/// hold by construction.
pub fn feasible(candidate: &ReductionCandidate) -> bool {
    [
        candidate.tx.p,
        candidate.tx.q,
        candidate.tx.r,
        candidate.ty.p,
        candidate.ty.q,
        candidate.ty.r,
    ]
    .iter()
    .all(|&v| (0.0..=1.0).contains(&v))
}

/// Which of the three parameters the root search varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FreeAxis {
    Alpha,
    Beta,
    Gamma,
}

/// Work counters for a solve run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub cells_scanned: u64,
    pub residual_evaluations: u64,
    pub bisection_steps: u64,
}

/// A root certificate: the candidate, its recomputed residual, and its
/// feasibility at the time it was produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionSolution {
    pub candidate: ReductionCandidate,
    pub residual: f64,
    pub feasible: bool,
    pub trace: SolverTrace,
}

fn assemble(axis: FreeAxis, pinned: (f64, f64), root: f64) -> (f64, f64, f64) {
    match axis {
        FreeAxis::Alpha => (root, pinned.0, pinned.1),
        FreeAxis::Beta => (pinned.0, root, pinned.1),
        FreeAxis::Gamma => (pinned.0, pinned.1, root),
    }
}

fn bisect<F: Fn(f64) -> f64>(
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
    f: F,
    trace: &mut SolverTrace,
) -> f64 {
    while hi - lo > BRACKET_WIDTH {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        trace.residual_evaluations += 1;
        trace.bisection_steps += 1;
        if f_mid == 0.0 {
            return mid;
        }
        debug_assert!(f_lo != 0.0, "bracket endpoint must straddle zero");
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn axis_roots(
    problem: &ReductionProblem,
    axis: FreeAxis,
    pinned: (f64, f64),
    residual_tol: f64,
    scan_points: usize,
    trace: &mut SolverTrace,
) -> Vec<ReductionSolution> {
    let Some((lo, hi)) = problem.axis_interval(axis) else {
        return Vec::new();
    };
    let eval = |x: f64| {
        let (a, b, g) = assemble(axis, pinned, x);
        problem.residual(a, b, g)
    };
    let points = if hi > lo { scan_points.max(2) } else { 1 };
    let grid_value = |i: usize| {
        if points == 1 {
            lo
        } else {
            lo + (hi - lo) * (i as f64 / (points - 1) as f64)
        }
    };

    let mut solutions = Vec::new();
    let mut push_root = |root: f64, trace: &mut SolverTrace| {
        let (a, b, g) = assemble(axis, pinned, root);
        let candidate = problem.candidate(a, b, g);
        let residual = problem.residual(a, b, g);
        trace.residual_evaluations += 1;
        if residual.abs() <= residual_tol {
            solutions.push(ReductionSolution {
                candidate,
                residual,
                feasible: feasible(&candidate),
                trace: *trace,
            });
        }
    };

    let mut prev_x = grid_value(0);
    let mut prev_f = eval(prev_x);
    trace.residual_evaluations += 1;
    if prev_f == 0.0 {
        push_root(prev_x, trace);
    }
    for i in 1..points {
        let x = grid_value(i);
        let fx = eval(x);
        trace.residual_evaluations += 1;
        if fx == 0.0 {
            push_root(x, trace);
        } else if prev_f != 0.0 && (prev_f < 0.0) != (fx < 0.0) {
            let root = bisect(prev_x, x, prev_f, eval, trace);
            push_root(root, trace);
        }
        prev_x = x;
        prev_f = fx;
    }
    solutions
}

/// All residual roots along one axis with the other two parameters pinned,
/// in left-to-right order. Brackets come from a `scan_points` sweep of the
/// axis' feasible interval, each refined by bisection; only roots whose
/// recomputed residual meets `residual_tol` are returned.
pub fn roots_along_axis(
    problem: &ReductionProblem,
    axis: FreeAxis,
    pinned: (f64, f64),
    residual_tol: f64,
    scan_points: usize,
) -> Vec<ReductionSolution> {
    let mut trace = SolverTrace::default();
    axis_roots(problem, axis, pinned, residual_tol, scan_points, &mut trace)
}

/// Grid search for a feasible root: `(β, γ)` range over a `grid × grid`
/// lattice of their feasible box in deterministic row-major order, and the
/// first feasible α root wins. Solutions are not unique — any feasible root
/// is acceptable — and an absent result only means this resolution found
/// none, not that none exists.
pub fn solve(
    problem: &ReductionProblem,
    residual_tol: f64,
    grid: usize,
) -> Option<ReductionSolution> {
    let grid = grid.max(2);
    let (beta_lo, beta_hi) = problem.axis_interval(FreeAxis::Beta)?;
    let (gamma_lo, gamma_hi) = problem.axis_interval(FreeAxis::Gamma)?;
    let mut trace = SolverTrace::default();

    let steps = |lo: f64, hi: f64| if hi > lo { grid } else { 1 };
    let beta_steps = steps(beta_lo, beta_hi);
    let gamma_steps = steps(gamma_lo, gamma_hi);

    for bi in 0..beta_steps {
        let beta = if beta_steps == 1 {
            beta_lo
        } else {
            beta_lo + (beta_hi - beta_lo) * (bi as f64 / (beta_steps - 1) as f64)
        };
        for gi in 0..gamma_steps {
            let gamma = if gamma_steps == 1 {
                gamma_lo
            } else {
                gamma_lo + (gamma_hi - gamma_lo) * (gi as f64 / (gamma_steps - 1) as f64)
            };
            trace.cells_scanned += 1;
            let roots = axis_roots(
                problem,
                FreeAxis::Alpha,
                (beta, gamma),
                residual_tol,
                grid,
                &mut trace,
            );
            if let Some(mut solution) = roots.into_iter().find(|s| s.feasible) {
                solution.trace = trace;
                return Some(solution);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(v: f64) -> KParam {
        KParam::new(v).unwrap()
    }

    fn t(p: f64, q: f64, r: f64) -> LetterTriple {
        LetterTriple::new(p, q, r).unwrap()
    }

    // Row-wise reference instances, regrouped into per-letter triples, and
    // their term sums computed independently with 40-digit arithmetic.
    fn instance_1() -> ReductionProblem {
        build_problem(t(0.5, 0.1, 0.3), t(0.1, 0.2, 0.3), t(0.2, 0.4, 0.1), k(1.0)).unwrap()
    }

    fn instance_2() -> ReductionProblem {
        build_problem(t(0.1, 0.0, 0.2), t(0.2, 0.0, 0.7), t(0.2, 1.0, 0.1), k(1.0)).unwrap()
    }

    fn instance_3() -> ReductionProblem {
        build_problem(t(0.1, 0.9, 0.2), t(0.9, 0.1, 0.2), t(0.0, 0.0, 0.5), k(1.0)).unwrap()
    }

    const TARGET_1: f64 = 0.49665678863721865;
    const TARGET_2: f64 = 2.0820657205413789;
    const TARGET_3: f64 = 1.6959938131099000;

    #[test]
    fn targets_match_reference_values() {
        assert!((instance_1().target - TARGET_1).abs() < 1e-12);
        assert!((instance_2().target - TARGET_2).abs() < 1e-12);
        assert!((instance_3().target - TARGET_3).abs() < 1e-12);
    }

    #[test]
    fn zero_triples_leave_only_the_first_term() {
        use crate::letter_term;
        let t1 = t(0.5, 0.1, 0.3);
        let zero = t(0.0, 0.0, 0.0);
        let problem = build_problem(t1, zero, zero, k(1.0)).unwrap();
        assert_eq!(problem.target, letter_term(t1, k(1.0)));
    }

    #[test]
    fn oversized_component_sums_are_rejected() {
        let result = build_problem(t(0.8, 0.1, 0.1), t(0.4, 0.1, 0.1), t(0.0, 0.0, 0.0), k(1.0));
        assert!(matches!(result, Err(Error::SumOutOfRange { component: 'p', .. })));
    }

    #[test]
    fn candidate_coordinates_follow_the_split_rule() {
        let problem = instance_1();
        let c = problem.candidate(0.0, 0.0, 0.0);
        // p_x = p1 + p3/2, p_y = p2 + p3/2, and likewise per component.
        assert!((c.tx.p - 0.6).abs() < 1e-15);
        assert!((c.ty.p - 0.2).abs() < 1e-15);
        assert!((c.tx.q - 0.3).abs() < 1e-15);
        assert!((c.ty.q - 0.4).abs() < 1e-15);
        assert!((c.tx.r - 0.35).abs() < 1e-15);
        assert!((c.ty.r - 0.35).abs() < 1e-15);
    }

    #[test]
    fn component_sums_are_conserved() {
        let problem = instance_1();
        for (alpha, beta, gamma) in [(0.0, 0.0, 0.0), (-0.17, -0.125, -0.04), (0.3, -0.2, 0.1)] {
            let c = problem.candidate(alpha, beta, gamma);
            assert!((c.tx.p + c.ty.p - 0.8f64).abs() < 1e-12);
            assert!((c.tx.q + c.ty.q - 0.7f64).abs() < 1e-12);
            assert!((c.tx.r + c.ty.r - 0.7f64).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_split_has_zero_residual() {
        let t1 = t(0.3, 0.2, 0.4);
        let zero = t(0.0, 0.0, 0.0);
        let problem = build_problem(t1, t1, zero, k(1.0)).unwrap();
        assert_eq!(problem.residual(0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn residual_sign_changes_across_reference_brackets() {
        let p1 = instance_1();
        assert!(p1.residual(-0.1668334, -0.125, -0.04) > 0.0);
        assert!(p1.residual(-0.1668333, -0.125, -0.04) < 0.0);

        let p2 = instance_2();
        assert!(p2.residual(-0.14, 0.4161126, -0.14) < 0.0);
        assert!(p2.residual(-0.14, 0.4161127, -0.14) > 0.0);

        let p3 = instance_3();
        assert!(p3.residual(-0.05, 0.05, 0.0442517) > 0.0);
        assert!(p3.residual(-0.05, 0.05, 0.0442518) < 0.0);
    }

    #[test]
    fn feasibility_checks_the_unit_box() {
        let problem = instance_1();
        assert!(feasible(&problem.candidate(0.0, 0.0, 0.0)));
        // Large α drives p_y = 0.2 − α negative.
        assert!(!feasible(&problem.candidate(0.5, 0.0, 0.0)));
        // The reported instance-3 solution is feasible.
        let p3 = instance_3();
        assert!(feasible(&p3.candidate(-0.05, 0.05, 0.04425)));
    }

    #[test]
    fn axis_roots_recover_the_reference_brackets() {
        // Instance 1 has two α roots at the pinned (β, γ); the reference one
        // is the rightmost.
        let roots = roots_along_axis(&instance_1(), FreeAxis::Alpha, (-0.125, -0.04), 1e-9, 101);
        assert_eq!(roots.len(), 2);
        assert!(roots.iter().all(|s| s.feasible && s.residual.abs() <= 1e-9));
        assert!((roots[0].candidate.alpha - (-0.192680866522)).abs() < 1e-9);
        assert!((roots[1].candidate.alpha - (-0.166833330666)).abs() < 1e-9);
        assert!(roots[1].candidate.alpha > -0.1668334 - 1e-7);
        assert!(roots[1].candidate.alpha < -0.1668333 + 1e-7);

        let roots = roots_along_axis(&instance_2(), FreeAxis::Beta, (-0.14, -0.14), 1e-9, 101);
        assert_eq!(roots.len(), 1);
        assert!((roots[0].candidate.beta - 0.416112675622).abs() < 1e-9);

        let roots = roots_along_axis(&instance_3(), FreeAxis::Gamma, (-0.05, 0.05), 1e-9, 101);
        assert_eq!(roots.len(), 1);
        assert!((roots[0].candidate.gamma - 0.0442517860791).abs() < 1e-9);
    }

    #[test]
    fn solve_finds_feasible_roots_for_all_reference_instances() {
        for problem in [instance_1(), instance_2(), instance_3()] {
            let solution = solve(&problem, 1e-9, 101).expect("a feasible root");
            assert!(solution.feasible);
            assert!(solution.residual.abs() <= 1e-9);
            assert!(feasible(&solution.candidate));
            // Independent re-verification of the root certificate.
            let recomputed = problem.residual(
                solution.candidate.alpha,
                solution.candidate.beta,
                solution.candidate.gamma,
            );
            assert!((recomputed - solution.residual).abs() < 1e-12);
            assert!(solution.trace.residual_evaluations > 0);
        }
    }

    #[test]
    fn solve_handles_random_instances_below_k_one() {
        use rand::SeedableRng;
        // Sampling a 4-part simplex point and dropping the last part gives a
        // non-negative row with sum ≤ 1, as the box constraints require.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5E);
        let mut row = || {
            let pmf = crate::search::sample_simplex(4, &mut rng);
            [pmf.values()[0], pmf.values()[1], pmf.values()[2]]
        };
        for kv in [0.2, 0.5, 0.8] {
            let (p, q, r) = (row(), row(), row());
            let problem = build_problem(
                t(p[0], q[0], r[0]),
                t(p[1], q[1], r[1]),
                t(p[2], q[2], r[2]),
                k(kv),
            )
            .unwrap();
            let solution = solve(&problem, 1e-9, 51)
                .unwrap_or_else(|| panic!("k={kv}: expected a feasible root"));
            assert!(solution.feasible);
            assert!(solution.residual.abs() <= 1e-9);
        }
    }

    #[test]
    fn solve_reports_honestly_on_extremal_sums() {
        // Point masses on three different letters: every component sum sits
        // exactly at the upper bound, squeezing the feasible box.
        let problem = build_problem(
            t(1.0, 0.0, 0.0),
            t(0.0, 1.0, 0.0),
            t(0.0, 0.0, 1.0),
            k(1.0),
        )
        .unwrap();
        if let Some(solution) = solve(&problem, 1e-9, 51) {
            assert!(solution.feasible);
            assert!(solution.residual.abs() <= 1e-9);
            let recomputed = problem.residual(
                solution.candidate.alpha,
                solution.candidate.beta,
                solution.candidate.gamma,
            );
            assert!((recomputed - solution.residual).abs() < 1e-12);
        }
    }
}
