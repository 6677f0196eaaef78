//! The five named experiments. Each returns a [`Report`] with at least three
//! nontrivial checks, its CSV tables and optional field dumps.

use heisenfft_core::annihilation::{
    calibrate_kappa, dynamical_pair_report, estimate_constant, kappa_prime, observability_report, Envelope,
};
use heisenfft_core::central::{inverse_central, LambdaStack};
use heisenfft_core::counterexample::{
    alpha_sweep, decay_bound_check, parseval_check, tail_mass_check, BumpProfile, DecayPoint, ParsevalForm, Sampling,
};
use heisenfft_core::field::sample;
use heisenfft_core::operators::StencilOrder;
use heisenfft_core::propagator::{propagate, propagate_slice_direct, propagate_slice_factored};
use heisenfft_core::reduction::{
    chain_refinement, chain_verify, support_transport, ChainConfig, ChainReport, ChainRequest, PotentialSpec,
    TimeProfile,
};
use heisenfft_core::splitstep::HarmonicPropagator;
use heisenfft_core::{
    AnalyticField, CentralAxis, HeisenbergSample, IndicatorSet, Slice2N, SpatialGrid, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{
    AnnihilationBlock, CounterexampleBlock, ExperimentConfig, ObservabilityBlock, PropagatorBlock, ReductionBlock,
    Scenario,
};
use crate::hsnf::Dump;
use crate::report::{Check, Report, Table};

/// Everything a scenario produced, not yet written.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub tables: Vec<Table>,
    pub dumps: Vec<(String, Dump)>,
}

pub fn execute(cfg: &ExperimentConfig) -> heisenfft_core::Result<Outcome> {
    let mut out = Outcome { report: Report::new(cfg), tables: Vec::new(), dumps: Vec::new() };
    // `validate` guarantees the block for the selected scenario.
    match cfg.scenario {
        Scenario::PropagatorSelftest => propagator(cfg, cfg.propagator.as_ref().expect("validated"), &mut out)?,
        Scenario::Annihilation => annihilation(cfg, cfg.annihilation.as_ref().expect("validated"), &mut out)?,
        Scenario::Observability => observability(cfg, cfg.observability.as_ref().expect("validated"), &mut out)?,
        Scenario::Counterexample => counterexample(cfg, cfg.counterexample.as_ref().expect("validated"), &mut out)?,
        Scenario::ReductionChain => reduction(cfg, cfg.reduction.as_ref().expect("validated"), &mut out)?,
    }
    Ok(out)
}

fn gaussian(grid: &SpatialGrid, width: f64) -> Slice2N {
    Slice2N::from_fn(*grid, |z| C64::new((-width * z.iter().map(|x| x * x).sum::<f64>()).exp(), 0.0))
}

/// Gaussian in `z` whose λ-spectrum is `1 − λ²/(2 band²)` on `|λ| ≤ band`, zero elsewhere.
pub fn band_limited(grid: SpatialGrid, axis: CentralAxis, band: f64, width: f64) -> heisenfft_core::Result<HeisenbergSample> {
    let mut stack = LambdaStack::zeros(grid, axis);
    let g = gaussian(&grid, width);
    for k in 0..axis.points() {
        let lambda = axis.lambda(k);
        if lambda.abs() <= band {
            stack.set_slice(k, g.scaled(C64::new(1.0 - 0.5 * (lambda / band).powi(2), 0.0)))?;
        }
    }
    Ok(inverse_central(&stack))
}

fn propagator(cfg: &ExperimentConfig, b: &PropagatorBlock, out: &mut Outcome) -> heisenfft_core::Result<()> {
    let grid = cfg.grid.build()?;
    let dim = grid.dim();
    let u0 = sample(&AnalyticField::gaussian_at(&b.initial.center(dim), b.initial.width)?, &grid)?;
    let mut table = Table::new("agreement", &["lambda", "s", "relative_difference", "factored_norm_ratio"]);
    let mut worst: f64 = 0.0;
    let n0 = u0.norm_sq(None)?;
    for &lambda in &b.lambdas {
        for &s in &b.times {
            let direct = propagate_slice_direct(&u0, lambda, s)?;
            let factored = propagate_slice_factored(&u0, lambda, s)?;
            let diff = factored.relative_distance(&direct)?;
            worst = worst.max(diff);
            table.push(vec![lambda, s, diff, (factored.norm_sq(None)? / n0).sqrt()]);
            if cfg.dump_fields {
                out.dumps.push((format!("factored_l{lambda}_s{s}"), Dump::Slice(factored)));
            }
        }
    }
    let tol = b.tolerances;
    out.report.value("direct_factored_max_relative_difference", worst);
    out.report.check(Check::at_most("direct_vs_factored", worst, tol.agreement));

    let u = &b.unitarity;
    let (ugrid, axis) = (u.grid.build()?, u.axis.build()?);
    let f0 = band_limited(ugrid, axis, u.band, u.width)?;
    let one = propagate(&f0, u.time)?;
    let first = propagate(&f0, u.split)?;
    let two = propagate(&first.field, u.time - u.split)?;
    let drift = (one.field.norm_sq(None)? / f0.norm_sq(None)?).sqrt() - 1.0;
    let semigroup = two.field.relative_distance(&one.field)?;
    let excluded = one.excluded_mass_fraction.max(first.excluded_mass_fraction).max(two.excluded_mass_fraction);
    out.report.value("unitarity_deviation", drift.abs());
    out.report.value("excluded_mass_fraction", excluded);
    out.report.value("semigroup_difference", semigroup);
    out.report.check(Check::at_most("unitarity", drift.abs(), tol.unitarity));
    out.report.check(Check::at_most("excluded_mass", excluded, tol.excluded_mass));
    out.report.check(Check::at_most("semigroup", semigroup, tol.semigroup));
    out.tables.push(table);
    if cfg.dump_fields {
        out.dumps.push(("initial_slice".into(), Dump::Slice(u0)));
        out.dumps.push(("initial".into(), Dump::Sample(f0)));
        out.dumps.push(("propagated".into(), Dump::Sample(one.field)));
    }
    Ok(())
}

fn annihilation(cfg: &ExperimentConfig, b: &AnnihilationBlock, out: &mut Outcome) -> heisenfft_core::Result<()> {
    let grid = cfg.grid.build()?;
    let dim = grid.dim();
    let set = |c: &crate::config::SetConfig| IndicatorSet::from_region(grid, &c.region(dim));
    let (s, sigma, s_big, sigma_big) = (set(&b.s_set), set(&b.sigma_set), set(&b.s_superset), set(&b.sigma_superset));
    let tol = b.tolerances;

    let base = estimate_constant(&s, &sigma, b.lambda, b.time)?;
    let u = HarmonicPropagator::new(grid, b.lambda, b.time)?;
    let (s_out, sigma_out) = (s.complement(), sigma.complement());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut fields = Table::new("random_fields", &["index", "lhs", "rhs", "lhs_over_constant_rhs"]);
    let mut worst: f64 = 0.0;
    for i in 0..b.random_fields {
        let f = Slice2N::from_fn(grid, |_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let lhs = f.norm_sq(None)?;
        let rhs = f.norm_sq(Some(&s_out))? + u.apply(&f)?.norm_sq(Some(&sigma_out))?;
        let q = lhs / (base.constant * rhs);
        worst = worst.max(q);
        fields.push(vec![i as f64, lhs, rhs, q]);
    }
    out.report.value("constant", base.constant);
    out.report.value("sigma_min", base.sigma_min);
    out.report.value("random_field_worst_ratio", worst);
    out.report.check(Check::holds("constant_finite", !base.degenerate && base.constant.is_finite()));
    out.report.check(Check::at_most("random_fields_dominated", worst, 1.0 + tol.inequality));

    let mut sweep = Table::new("constants", &["s_measure", "sigma_measure", "lambda", "s", "sigma_min", "constant"]);
    let mut constant_of = |a: &IndicatorSet, c: &IndicatorSet| -> heisenfft_core::Result<f64> {
        let e = estimate_constant(a, c, b.lambda, b.time)?;
        sweep.push(vec![a.measure(), c.measure(), b.lambda, b.time, e.sigma_min, e.constant]);
        Ok(e.constant)
    };
    let c_ss = constant_of(&s, &sigma)?;
    let c_bs = constant_of(&s_big, &sigma)?;
    let c_sb = constant_of(&s, &sigma_big)?;
    let c_bb = constant_of(&s_big, &sigma_big)?;
    let nested = s.is_subset_of(&s_big)? && sigma.is_subset_of(&sigma_big)?;
    out.report.check(Check::holds("supersets_nested", nested));
    out.report.check(Check::holds("monotone_in_s", c_bs >= c_ss && c_bb >= c_sb));
    out.report.check(Check::holds("monotone_in_sigma", c_sb >= c_ss && c_bb >= c_bs));
    let empty = IndicatorSet::empty(grid);
    let c_empty = constant_of(&empty, &empty)?;
    out.report.value("empty_constant", c_empty);
    out.report.check(Check::at_most("empty_sets_one_half", (c_empty - 0.5).abs(), tol.empty));

    let bl = &b.band_limited;
    let (bgrid, axis) = (bl.grid.build()?, bl.axis.build()?);
    let u0 = band_limited(bgrid, axis, bl.band, bl.width)?;
    let ball = IndicatorSet::from_region(bgrid, &bl.set.region(bgrid.dim()));
    let weight = kappa_prime(bgrid.n(), bl.band, bl.time)? * ball.measure() * ball.measure();
    let mut per_lambda = Vec::new();
    for lambda in axis.lambdas().into_iter().filter(|l| l.abs() <= bl.band) {
        per_lambda.push((lambda, estimate_constant(&ball, &ball, lambda, bl.time)?.constant));
    }
    let samples: Vec<(f64, f64)> = per_lambda.iter().map(|&(_, c)| (c, weight)).collect();
    let kappa = calibrate_kappa(&samples)?;
    let rep = dynamical_pair_report(&u0, &ball, &ball, bl.time, Some(kappa))?;
    let band = rep.band_limit.unwrap_or(bl.band);
    let envelope = Envelope::new(kappa, bgrid.n(), band, bl.time)?.value(ball.measure(), ball.measure());
    let mut rows = Table::new("band_limited", &["lambda", "lhs", "rhs_outside_s", "rhs_outside_sigma", "constant"]);
    let mut dominated = true;
    for row in rep.per_lambda.iter().filter(|r| r.lambda.abs() <= bl.band) {
        let c = per_lambda.iter().find(|(l, _)| *l == row.lambda).map_or(f64::INFINITY, |p| p.1);
        dominated &= row.lhs <= c * (row.rhs_outside_s + row.rhs_outside_sigma) * (1.0 + tol.per_lambda);
        rows.push(vec![row.lambda, row.lhs, row.rhs_outside_s, row.rhs_outside_sigma, c]);
    }
    out.report.value("kappa", kappa);
    out.report.value("envelope", envelope);
    out.report.value("aggregate_ratio", rep.ratio);
    out.report.check(Check::holds("per_lambda_dominated", dominated));
    out.report.check(Check::holds("aggregate_bound", rep.bound_holds == Some(true) && rep.ratio <= envelope));
    out.tables.extend([fields, sweep, rows]);
    Ok(())
}

fn observability(cfg: &ExperimentConfig, b: &ObservabilityBlock, out: &mut Outcome) -> heisenfft_core::Result<()> {
    let grid = cfg.grid.build()?;
    let dim = grid.dim();
    let s = IndicatorSet::from_region(grid, &b.s_set.region(dim));
    let sigma = IndicatorSet::from_region(grid, &b.sigma_set.region(dim));
    let empty = IndicatorSet::empty(grid);
    let u0 = sample(&AnalyticField::gaussian_at(&b.initial.center(dim), b.initial.width)?, &grid)?;
    let [s1, s2] = b.times;
    let tol = b.tolerances;

    let two = observability_report(&u0, &s, &sigma, b.lambda, s1, s2)?;
    let c = two.constant.as_ref().map_or(f64::INFINITY, |c| c.constant);
    out.report.value("constant", c);
    out.report.value("ratio", two.ratio);
    out.report.check(Check::holds("constant_finite", c.is_finite()));
    out.report.check(Check::holds("bound_holds", two.bound_holds == Some(true)));

    let reduced = observability_report(&u0, &s, &empty, b.lambda, 0.0, s2)?;
    let single = estimate_constant(&s, &empty, b.lambda, s2)?;
    let rc = reduced.constant.as_ref().map_or(f64::INFINITY, |c| c.constant);
    out.report.value("single_time_constant", single.constant);
    out.report.check(Check::at_most("reduces_to_single_time", (rc - single.constant).abs() / single.constant, tol.reduction));

    let both = observability_report(&u0, &empty, &empty, b.lambda, s1, s2)?;
    let bc = both.constant.as_ref().map_or(f64::INFINITY, |c| c.constant);
    out.report.check(Check::at_most("empty_sets_one_half", (bc - 0.5).abs(), tol.empty));

    let mut table = Table::new("observability", &["s1", "s2", "lhs", "rhs_outside_s", "rhs_outside_sigma", "constant"]);
    table.push(vec![s1, s2, two.lhs, two.rhs_outside_s, two.rhs_outside_sigma, c]);
    table.push(vec![0.0, s2, reduced.lhs, reduced.rhs_outside_s, reduced.rhs_outside_sigma, rc]);
    table.push(vec![s1, s2, both.lhs, both.rhs_outside_s, both.rhs_outside_sigma, bc]);
    out.tables.push(table);
    if cfg.dump_fields {
        out.dumps.push(("initial".into(), Dump::Slice(u0)));
    }
    Ok(())
}

fn counterexample(cfg: &ExperimentConfig, b: &CounterexampleBlock, out: &mut Outcome) -> heisenfft_core::Result<()> {
    let grid = cfg.grid.build()?;
    let axis = cfg.axis.expect("validated").build()?;
    let profile = BumpProfile::new(b.alpha)?;
    let tol = b.tolerances;

    let u0 = profile.sample(&grid, &axis, 0.0, Sampling::Quadrature)?;
    let evolved = propagate(&u0, b.shift_time)?;
    let expected = profile.sample(&grid, &axis, b.shift_time, Sampling::Quadrature)?;
    let shift = evolved.field.relative_distance(&expected)?;
    out.report.value("shift_law_relative_difference", shift);
    out.report.check(Check::holds("shift_law_nothing_excluded", evolved.excluded.is_empty()));
    out.report.check(Check::at_most("shift_law", shift, tol.shift_law));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dim = grid.dim();
    let reach = b.decay.reach;
    let mut points: Vec<DecayPoint> = (0..b.decay.random_points)
        .map(|_| DecayPoint {
            z: (0..dim).map(|_| rng.random_range(-reach..reach)).collect(),
            t: rng.random_range(-30.0..30.0),
            s: rng.random_range(0.0..2.0),
        })
        .collect();
    // The one point where the k ≥ 1 bounds are infinite.
    points.push(DecayPoint { z: vec![0.0; dim], t: 1.0, s: 1.0 / grid.n() as f64 });
    let mut decay = Table::new("decay", &["k", "max_ratio", "degenerate_points"]);
    for &k in &b.decay.orders {
        let rep = decay_bound_check(&profile, k, &points)?;
        decay.push(vec![k as f64, rep.max_ratio, rep.degenerate_points as f64]);
        out.report.value(format!("decay_k{k}_max_ratio"), rep.max_ratio);
        out.report.check(Check::at_most(format!("decay_bound_k{k}"), rep.max_ratio, 1.0 + tol.decay_slack));
    }

    let mut tail = Table::new("tail_mass", &["alpha", "r", "tail_mass", "bound", "total_mass", "tail_over_bound", "total_over_tail"]);
    for &[alpha, r] in &b.tail_points {
        let rep = tail_mass_check(&BumpProfile::new(alpha)?, r, grid.n())?;
        let q = rep.tail_mass / rep.bound;
        tail.push(vec![alpha, r, rep.tail_mass, rep.bound, rep.total_mass, q, rep.total_mass / rep.tail_mass]);
        out.report.value(format!("tail_over_bound_a{alpha}_r{r}"), q);
        out.report.check(Check::at_most(format!("tail_bound_a{alpha}_r{r}"), q, 1.0 + tol.tail_slack));
    }
    let rows = alpha_sweep(&b.sweep.alphas, b.sweep.r, grid.n(), b.sweep.nodes)?;
    let mut sweep = Table::new("alpha_sweep", &["alpha", "r", "tail_mass", "bound", "total_mass", "tail_over_bound", "total_over_tail"]);
    let mut growth = Vec::new();
    let mut bound_ratios = Vec::new();
    for rep in &rows {
        let (q, g) = (rep.tail_mass / rep.bound, rep.total_mass / rep.tail_mass);
        sweep.push(vec![rep.alpha, rep.r, rep.tail_mass, rep.bound, rep.total_mass, q, g]);
        out.report.check(Check::at_most(format!("sweep_tail_bound_a{}", rep.alpha), q, 1.0 + tol.tail_slack));
        growth.push(g);
        bound_ratios.push(q);
    }
    out.report.check(Check::holds("sweep_total_over_tail_increasing", growth.windows(2).all(|w| w[1] > w[0])));
    out.report.check(Check::holds("sweep_tail_over_bound_decreasing", bound_ratios.windows(2).all(|w| w[1] < w[0])));

    let (pgrid, paxis) = (b.parseval.grid.build()?, b.parseval.axis.build()?);
    let pv = parseval_check(&profile, &pgrid, &paxis, tol.parseval)?;
    out.report.value("parseval_lhs", pv.lhs);
    out.report.value("parseval_rel_err_a", pv.rel_err_a);
    out.report.value("parseval_rel_err_b", pv.rel_err_b);
    out.report.value(
        "parseval_form",
        match pv.matches {
            Some(ParsevalForm::A) => 1.0,
            Some(ParsevalForm::B) => 2.0,
            None => 0.0,
        },
    );
    out.report.check(Check::holds("parseval_unique_form", pv.matches.is_some()));
    out.tables.extend([decay, tail, sweep]);
    if cfg.dump_fields {
        out.dumps.push(("initial".into(), Dump::Sample(u0)));
        out.dumps.push(("evolved".into(), Dump::Sample(evolved.field)));
    }
    Ok(())
}

fn chain_row(table: &mut Table, r: &ChainReport) {
    table.push(vec![r.spacing, r.dt, r.r1, r.r2, r.r3, r.end_to_end.unwrap_or(f64::NAN), r.interpolation_error]);
}

fn reduction(cfg: &ExperimentConfig, b: &ReductionBlock, out: &mut Outcome) -> heisenfft_core::Result<()> {
    let grid = cfg.grid.build()?;
    let dim = grid.dim();
    let tol = b.tolerances;
    let initial = AnalyticField::gaussian_at(&b.initial.center(dim), b.initial.width)?;
    let req = ChainRequest {
        initial,
        grid,
        lambda: b.lambda,
        tau: b.tau,
        times: b.times.clone(),
        dt: b.dt,
        order: StencilOrder::Four,
        potential: None,
    };
    let refinement = chain_refinement(&req)?;
    let coarse = &refinement.coarse;
    let mut table = Table::new("chain", &["spacing", "dt", "r1", "r2", "r3", "end_to_end", "interpolation_error"]);
    chain_row(&mut table, coarse);
    chain_row(&mut table, &refinement.fine);
    for (i, (name, r)) in [("r1", coarse.r1), ("r2", coarse.r2), ("r3", coarse.r3)].into_iter().enumerate() {
        out.report.value(name, r);
        out.report.value(format!("{name}_refinement_ratio"), refinement.ratios[i]);
        out.report.check(Check::at_most(format!("residual_{name}"), r, tol.residual));
        out.report.check(Check::at_most(format!("refinement_{name}"), refinement.ratios[i], tol.refinement_ratio));
    }
    let e2e = coarse.end_to_end.unwrap_or(f64::INFINITY);
    out.report.value("end_to_end", e2e);
    out.report.check(Check::at_most("end_to_end", e2e, tol.end_to_end));

    let [a0, a1, a2] = b.support;
    let support = support_transport(&ChainConfig::new(b.lambda, a0, a1, a2)?, &grid)?;
    out.report.value("a3", support.a3);
    out.report.value("a4", support.a4);
    out.report.check(Check::holds("support_rotation", support.rotation_holds));
    out.report.check(Check::holds("support_lens", support.lens_holds));

    if let Some(p) = &b.potential {
        let profile = AnalyticField::gaussian_at(&p.profile.center(dim), p.profile.width)?.scale(C64::new(p.amplitude, 0.0));
        let spec = PotentialSpec::new(profile, TimeProfile::Cosine { omega: p.omega }, p.cutoff)?;
        let with = chain_verify(&ChainRequest { potential: Some(spec), ..req.clone() })?;
        chain_row(&mut table, &with);
        for (name, r) in [("r1", with.r1), ("r2", with.r2), ("r3", with.r3)] {
            out.report.value(format!("potential_{name}"), r);
            out.report.check(Check::at_most(format!("potential_residual_{name}"), r, tol.potential_residual));
        }
    }
    out.tables.push(table);
    Ok(())
}
