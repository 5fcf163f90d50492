use drs_lip::model::equivalent_vertical_sinusoid;
use drs_lip::oracle::{IntegratorConfig, NumericPhaseSolver};
use drs_lip::planner::{
    build_nlp, com_plan, lower_layer, sample_plan, solve_nlp, CoMPlan, DrsPreset, GaitParams,
    NlpEvaluation, NlpProblem, PlannerConfig, SolverReport,
};
use drs_lip::{ModelParams, Pitching, SurfaceMotion};
use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

fn model() -> ModelParams {
    ModelParams::new(0.42, 9.81, 25.0).unwrap()
}

fn drs3_equivalent() -> SurfaceMotion {
    let p = Pitching::from_degrees(5.0, 0.4, 1.0).unwrap();
    equivalent_vertical_sinusoid(&p).unwrap().into()
}

fn solve(gait: &GaitParams, motion: &SurfaceMotion) -> (SolverReport, CoMPlan) {
    let config = PlannerConfig::default();
    let nlp = build_nlp(gait, motion, &model(), &config).unwrap();
    let report = solve_nlp(&nlp, &[0.0; 16], &config.solver).unwrap();
    let plan = com_plan(&report.x, gait, motion, &model(), &config).unwrap();
    (report, plan)
}

fn post_check(gait: &GaitParams, plan: &CoMPlan, seed: u64) {
    let mut rng = SplitMix64::seed_from_u64(seed);
    for (k, phase) in plan.phases.iter().enumerate() {
        let polygon = &plan.schedule.phases[k].support_polygon;
        for _ in 0..100 {
            let t = rng.random_range(phase.start..phase.end);
            let off = phase.offset(t);
            let ratio = off[0].hypot(off[1]) / gait.z0;
            assert!(
                ratio <= gait.friction_coefficient + 1e-6,
                "friction {ratio} at t={t}"
            );
            let (pos, _) = phase.world(t);
            assert!(
                polygon.contains(pos, 1e-6),
                "CoM {pos:?} outside phase {k} at t={t}"
            );
        }
    }
}

fn check_plan(gait: &GaitParams, motion: &SurfaceMotion) {
    let (report, plan) = solve(gait, motion);
    assert!(report.max_violation <= 1e-6);
    post_check(gait, &plan, 7);
    assert!(plan.continuity_residuals().iter().all(|&r| r <= 1e-6));
    let v = plan.average_velocity();
    assert!((v[0] - gait.avg_velocity).abs() <= 1e-6);
    assert!(v[1].abs() <= 1e-6);
}

#[test]
fn g1_drs1_is_feasible() {
    check_plan(&GaitParams::g1(), &DrsPreset::Drs1.motion());
}

#[test]
fn g2_drs3_equivalent_is_feasible() {
    check_plan(&GaitParams::g2(), &drs3_equivalent());
}

#[test]
fn g1_pitching_is_feasible() {
    check_plan(&GaitParams::g1(), &DrsPreset::Drs2.motion());
}

#[test]
fn solve_is_bit_identical_across_runs() {
    let (a, _) = solve(&GaitParams::g1(), &DrsPreset::Drs1.motion());
    let (b, _) = solve(&GaitParams::g1(), &DrsPreset::Drs1.motion());
    assert_eq!(a.x, b.x);
    assert_eq!(a.evaluations, b.evaluations);
}

#[test]
fn feasible_start_is_returned_unchanged() {
    let gait = GaitParams::g1();
    let motion = DrsPreset::Drs1.motion();
    let config = PlannerConfig::default();
    let (first, _) = solve(&gait, &motion);
    let nlp = build_nlp(&gait, &motion, &model(), &config).unwrap();
    let again = solve_nlp(&nlp, &first.x, &config.solver).unwrap();
    assert!(again.outer_iterations <= 1);
    assert_eq!(again.x, first.x);
}

#[test]
fn numeric_constraints_reach_the_same_plan() {
    let gait = GaitParams::g1();
    let motion = DrsPreset::Drs1.motion();
    let config = PlannerConfig::default();
    let analytic = build_nlp(&gait, &motion, &model(), &config).unwrap();
    let numeric_solver = NumericPhaseSolver::new(
        *analytic.model(),
        analytic.timeline().clone(),
        IntegratorConfig::default(),
    )
    .unwrap();
    let numeric = build_nlp(&gait, &motion, &model(), &config)
        .unwrap()
        .with_phase_solver(Box::new(numeric_solver));
    let a = solve_nlp(&analytic, &[0.0; 16], &config.solver).unwrap();
    let b = solve_nlp(&numeric, &[0.0; 16], &config.solver).unwrap();
    let mut out = NlpEvaluation::with_sizes(16, analytic.n_eq(), analytic.n_ineq());
    analytic.evaluate(&b.x, &mut out).unwrap();
    assert!(out.max_violation() <= 1e-5);
    let diff =
        a.x.iter()
            .zip(&b.x)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
    assert!(diff < 1e-6, "decision vectors differ by {diff}");
}

#[test]
fn lower_layer_of_solved_plan() {
    let gait = GaitParams::g1();
    let motion = DrsPreset::Drs1.motion();
    let (_, com) = solve(&gait, &motion);
    let plan = lower_layer(&com, &gait, &motion, &PlannerConfig::default()).unwrap();
    let rows = sample_plan(&plan, 0.01);
    assert_eq!(rows.len(), 201);
    for r in &rows {
        assert!((r.base[2] - r.support_z - gait.z0).abs() < 1e-9);
        let swing = 15 & !r.support_mask;
        assert!(swing.count_ones() <= 1);
        for (i, f) in r.feet.iter().enumerate() {
            let ground = drs_lip::planner::surface_height_at(&motion, -1.0, [f[0], f[1]], r.t);
            if swing & (1 << i) == 0 {
                assert!((f[2] - ground).abs() < 1e-12);
            } else {
                assert!(f[2] >= ground - 1e-12);
                assert!(f[2] <= ground + gait.max_step_height + 1e-9);
            }
        }
    }
}
