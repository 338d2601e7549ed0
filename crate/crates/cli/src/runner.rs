//! Experiment orchestration.

use std::path::{Path, PathBuf};

use chrono::Utc;
use packlab::correlation::{
    clustering_gap, estimate_c_corr, estimate_c_var, lattice_r1_decay, r1_profile, spatial_pair_correlation, CEstimate,
    ProbabilityEstimate, ProfileWindow,
};
use packlab::input::rng::{derive_seed, key, stream, stream_rng, uniform};
use packlab::input::{Aabb, CellField, Region, SpaceTimePoint};
use packlab::limits::{
    boundary_scaling, cone_tail_sweep, default_beta, gaussianity_report, rescaled_samples, GaussianityOptions, GaussianityReport,
    GaussianityThresholds, Mode, RescaledVectorSample,
};
use packlab::nn::{nn_rescaled_samples, stabilization_radius};
use packlab::packing::{
    jam_lattice_window, pack_sequential, pack_window_infinite, sigma_infinite_with_diagnostics, simulate_birth_growth, simulate_desorption,
};
use packlab::parallel::{replicate_field, replicate_map};
use packlab::stats::{describe, linear_fit};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, ExperimentKind, ModeKind, RuleKind, SubstrateKind};
use crate::error::{CliError, Result};
use crate::oracles::{brute_force_sigma_oracle, padded_box, renyi_density_oracle};
use crate::outputs::{num, remove_outputs, write_all, ExperimentManifest, Outcome, Table};

/// Environment variable that overrides the worker count.
pub const WORKERS_ENV: &str = "PACKLAB_WORKERS";

fn to_json<S: serde::Serialize>(v: &S) -> Value {
    serde_json::to_value(v).expect("serialisable")
}

fn base_field(c: &ExperimentConfig) -> Result<CellField<f64>> {
    Ok(match c.substrate {
        SubstrateKind::Continuum => CellField::continuum(c.seed, c.dim, c.tau)?,
        SubstrateKind::Lattice => CellField::lattice(c.seed, c.dim)?,
    })
}

fn seeds(c: &ExperimentConfig, n: usize) -> Vec<u64> {
    (0..n).map(|i| derive_seed(c.seed, i as u64)).collect()
}

fn modes(c: &ExperimentConfig) -> Result<Vec<Mode<f64>>> {
    let fin = || c.house_region().map(Mode::Finite);
    Ok(match c.mode {
        ModeKind::Infinite => vec![Mode::Infinite],
        ModeKind::Finite => vec![fin()?],
        ModeKind::Both => vec![Mode::Infinite, fin()?],
    })
}

fn lambdas(c: &ExperimentConfig) -> Result<Vec<f64>> {
    if c.lambdas.is_empty() {
        return Err(CliError::Config("at least one lambda is required".into()));
    }
    Ok(c.lambdas.clone())
}

fn boxes(c: &ExperimentConfig) -> Result<Vec<Aabb<f64>>> {
    if c.boxes.is_empty() {
        return Err(CliError::Config("at least one box is required".into()));
    }
    c.box_list()
}

/// Runs the experiment without touching the disk.
pub fn execute(c: &ExperimentConfig) -> Result<Outcome> {
    c.validate()?;
    match c.experiment {
        ExperimentKind::Pack => run_pack(c),
        ExperimentKind::Correlate => run_correlate(c),
        ExperimentKind::Clt => run_clt(c),
        ExperimentKind::Boundary => run_boundary(c),
        ExperimentKind::Cones => run_cones(c),
        ExperimentKind::Nn => run_nn(c),
        ExperimentKind::Oracle => run_oracle(c),
    }
}

/// Worker count from the argument, then the environment, then rayon's
/// default.
pub fn resolve_workers(arg: Option<usize>) -> Result<usize> {
    if let Some(w) = arg {
        return if w == 0 { Err(CliError::Config("workers must be positive".into())) } else { Ok(w) };
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(w),
            _ => Err(CliError::Config(format!("{WORKERS_ENV} must be a positive integer"))),
        },
        Err(_) => Ok(rayon::current_num_threads()),
    }
}

/// Executes on a pool of `workers` threads and writes the result files into
/// `out` (or the config's output directory).
pub fn run(c: &ExperimentConfig, workers: usize, out: Option<&Path>) -> Result<ExperimentManifest> {
    let dir: PathBuf = out.map(Path::to_path_buf).or_else(|| c.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let started = Utc::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| execute(c));
    match outcome {
        Ok(o) => write_all(&dir, &o, c, workers, started),
        Err(e) => {
            remove_outputs(&dir);
            Err(e)
        }
    }
}

fn pack_window(c: &ExperimentConfig) -> Result<Region<f64>> {
    if c.house.is_empty() {
        let b = Aabb::new(&vec![0.0; c.dim], &vec![100.0; c.dim])?;
        return Ok(Region::from_box(b));
    }
    c.house_region()
}

fn run_pack(c: &ExperimentConfig) -> Result<Outcome> {
    let base = base_field(c)?;
    let window = pack_window(c)?;
    let vol = window.volume();
    let o = &c.options;
    let lattice = c.substrate == SubstrateKind::Lattice;
    let ms: Vec<bool> = match c.mode {
        ModeKind::Infinite => vec![true],
        ModeKind::Finite => vec![false],
        ModeKind::Both => vec![true, false],
    };
    if o.rule != RuleKind::Sequential && (lattice || ms.contains(&true)) {
        return Err(CliError::Config("desorption and birth-growth run in finite mode on the continuum only".into()));
    }
    let counts = replicate_map(c.replicates, |i| {
        let f = replicate_field(&base, i);
        ms.iter()
            .map(|&inf| {
                Ok(match (lattice, inf, o.rule) {
                    (true, true, _) => jam_lattice_window(&f, &window, None)?.len(),
                    (true, false, _) => jam_lattice_window(&f, &window, Some(&window))?.len(),
                    (false, true, _) => pack_window_infinite(&f, &window)?.accepted_count(),
                    (false, false, RuleKind::Sequential) => pack_sequential(f.sample_window(&window)?)?.accepted_count(),
                    (false, false, RuleKind::Desorption) => simulate_desorption(&f, &window, o.lifetime_rate)?.accepted_count(),
                    (false, false, RuleKind::BirthGrowth) => {
                        simulate_birth_growth(&f, &window, o.growth_speed, o.initial_radius)?.accepted_count()
                    }
                })
            })
            .collect::<packlab::Result<Vec<usize>>>()
    })?;
    let sd = seeds(c, c.replicates);
    let mut rep = Table::new(&["replicate", "seed", "mode", "accepted", "density"]);
    let mut summary = serde_json::Map::new();
    let oracle = if c.dim == 1 && !lattice && o.rule == RuleKind::Sequential { Some(renyi_density_oracle(c.tau)?) } else { None };
    for (k, &inf) in ms.iter().enumerate() {
        let label = if inf { "infinite" } else { "finite" };
        let dens: Vec<f64> = counts.iter().map(|r| r[k] as f64 / vol).collect();
        for (i, r) in counts.iter().enumerate() {
            rep.push(vec![i.to_string(), sd[i].to_string(), label.into(), r[k].to_string(), num(dens[i])]);
        }
        let (mean, se) = if dens.len() > 1 {
            let m = describe(&dens)?;
            (m.mean, m.sem())
        } else {
            (dens[0], f64::NAN)
        };
        let mut entry = json!({ "mean_density": mean, "standard_error": se, "replicates": dens.len() });
        if let Some(or) = oracle {
            let z = (mean - or) / se;
            entry["oracle_density"] = json!(or);
            entry["z_score"] = json!(z);
            entry["within_3se"] = json!(z.abs() <= 3.0);
        }
        summary.insert(label.into(), entry);
    }
    Ok(Outcome {
        summary: json!({
            "experiment": "pack",
            "rule": to_json(&o.rule),
            "substrate": to_json(&c.substrate),
            "window_volume": vol,
            "tau": c.tau,
            "modes": Value::Object(summary),
        }),
        replicates: rep,
        curves: Table::new(&["kind", "x", "value", "standard_error"]),
        replicate_seeds: sd,
    })
}

fn profile_rows(curves: &mut Table, kind: &str, grid: &[f64], prof: &[ProbabilityEstimate]) {
    for (t, p) in grid.iter().zip(prof) {
        curves.push(vec![kind.into(), num(*t), num(p.value), num(p.standard_error)]);
    }
}

/// Variance-method estimate of the covariance constant from counts in the
/// unit cube at one large `lambda`, on an independent seed.
fn c_by_variance(c: &ExperimentConfig, lambda: f64, replicates: usize, nn: bool) -> Result<CEstimate> {
    let mut side = c.clone();
    side.seed = key(c.seed, stream::AUX, &[0xC]);
    let base = base_field(&side)?;
    let unit = [Aabb::new(&vec![0.0; c.dim], &vec![1.0; c.dim])?];
    let raw = if nn {
        nn_rescaled_samples(&base, lambda, &unit, &Mode::Infinite, replicates)?
    } else {
        rescaled_samples(&base, lambda, &unit, &Mode::Infinite, replicates)?
    };
    let counts: Vec<f64> = raw.iter().map(|s| s.raw[0]).collect();
    Ok(estimate_c_var(&[(lambda, counts)], 1.0, c.dim)?)
}

fn run_correlate(c: &ExperimentConfig) -> Result<Outcome> {
    let base = base_field(c)?;
    let o = &c.options;
    let mut curves = Table::new(&["kind", "x", "value", "standard_error"]);
    let mut rep = Table::new(&["replicate", "seed", "intensity"]);
    let mut summary = json!({ "experiment": "correlate", "substrate": to_json(&c.substrate), "tau": c.tau });
    if c.substrate == SubstrateKind::Lattice {
        let side = o.window_side.round().max(1.0) as usize;
        let (prof, fit) = lattice_r1_decay(&base, &o.t_grid, c.replicates, side)?;
        profile_rows(&mut curves, "r1", &o.t_grid, &prof);
        let below: Vec<bool> = o.t_grid.iter().zip(&prof).map(|(t, p)| p.value <= (-t).exp() + 3.0 * p.standard_error).collect();
        summary["r1_decay"] = to_json(&fit);
        summary["r1_below_exp_bound"] = json!(below.iter().all(|&b| b));
        return Ok(Outcome { summary, replicates: rep, curves, replicate_seeds: seeds(c, c.replicates) });
    }
    if !o.t_grid.is_empty() {
        let window = ProfileWindow { side: o.window_side, probes: o.probes };
        let prof = r1_profile(&base, &o.t_grid, c.replicates, window)?;
        profile_rows(&mut curves, "r1", &o.t_grid, &prof);
        let pts: Vec<(f64, f64)> =
            o.t_grid.iter().zip(&prof).filter(|(t, p)| **t > 0.0 && p.value > 0.0).map(|(t, p)| (t.ln(), p.value.ln())).collect();
        let fit = if pts.len() >= 3 {
            linear_fit(&pts.iter().map(|p| p.0).collect::<Vec<_>>(), &pts.iter().map(|p| p.1).collect::<Vec<_>>()).ok()
        } else {
            None
        };
        summary["r1_loglog_fit"] = to_json(&fit);
    }
    if o.bin_edges.len() >= 2 {
        let win = Aabb::new(&vec![0.0; c.dim], &vec![o.pair_window; c.dim])?;
        let region = Region::from_box(win.clone());
        let samples = replicate_map(c.replicates, |i| pack_window_infinite(&replicate_field(&base, i), &region))?;
        let corr = spatial_pair_correlation(&samples, &win, &o.bin_edges)?;
        for (b, (v, se)) in corr.estimates.iter().zip(&corr.standard_errors).enumerate() {
            curves.push(vec!["r2".into(), num(corr.bin_mid(b)), num(*v), num(*se)]);
        }
        for (i, r1) in corr.sample_intensities().iter().enumerate() {
            rep.push(vec![i.to_string(), derive_seed(c.seed, i as u64).to_string(), num(*r1)]);
        }
        let cc = estimate_c_corr(&corr)?;
        summary["intensity"] = json!({ "value": corr.intensity, "standard_error": corr.intensity_se });
        summary["c_corr"] = to_json(&cc);
        if !c.lambdas.is_empty() {
            let unit = [Aabb::new(&vec![0.0; c.dim], &vec![1.0; c.dim])?];
            let series = c
                .lambdas
                .iter()
                .map(|&l| {
                    let s = rescaled_samples(&base, l, &unit, &Mode::Infinite, c.replicates)?;
                    Ok((l, s.iter().map(|v| v.raw[0]).collect()))
                })
                .collect::<Result<Vec<(f64, Vec<f64>)>>>()?;
            let cv = estimate_c_var(&series, 1.0, c.dim)?;
            for &(l, v, se) in &cv.by_lambda {
                curves.push(vec!["c_var".into(), num(l), num(v), num(se)]);
            }
            let rel = (cc.value - cv.value).abs() / cv.value.abs();
            summary["c_var"] = to_json(&cv);
            summary["c_relative_difference"] = json!(rel);
            summary["c_below_intensity"] = json!(cc.value < corr.intensity && cv.value < corr.intensity);
        }
    }
    if !o.separations.is_empty() {
        let [tk, tl] = o.cluster_times;
        if !(tk > 0.0 && tk <= c.tau && tl > 0.0 && tl <= c.tau) {
            return Err(CliError::Config("cluster_times must lie in (0, tau]".into()));
        }
        let k = [SpaceTimePoint::new(&vec![0.0; c.dim], tk)];
        let l = [SpaceTimePoint::new(&vec![0.0; c.dim], tl)];
        let rpt = clustering_gap(&k, &l, &o.separations, &base, c.replicates)?;
        for r in &rpt.rows {
            curves.push(vec!["gap".into(), num(r.separation), num(r.gap), num(r.gap_se)]);
            curves.push(vec!["cones_meet".into(), num(r.separation), num(r.cones_meet.value), num(r.cones_meet.standard_error)]);
        }
        summary["clustering"] = to_json(&rpt);
    }
    Ok(Outcome { summary, replicates: rep, curves, replicate_seeds: seeds(c, c.replicates) })
}

fn gauss_block(
    c: &ExperimentConfig,
    samples_for: impl Fn(f64, &Mode<f64>) -> Result<Vec<RescaledVectorSample>>,
    c_hat: f64,
    jitter: bool,
    rep: &mut Table,
    curves: &mut Table,
) -> Result<Vec<(f64, &'static str, GaussianityReport)>> {
    let opts = GaussianityOptions { jitter, lilliefors_sims: c.options.lilliefors_sims, seed: c.seed };
    let mut reports = Vec::new();
    for l in lambdas(c)? {
        for m in modes(c)? {
            let s = samples_for(l, &m)?;
            for v in &s {
                let mut row = vec![num(l), m.label().into(), v.replicate.to_string(), v.replicate_seed.to_string()];
                row.extend(v.raw.iter().map(|x| num(*x)));
                row.extend(v.centered_scaled.iter().map(|x| num(*x)));
                rep.push(row);
            }
            let r = gaussianity_report(&s, c_hat, &opts, &GaussianityThresholds::default())?;
            for i in 0..r.empirical_covariance.len() {
                for j in i..r.empirical_covariance.len() {
                    curves.push(vec![
                        num(l),
                        m.label().into(),
                        i.to_string(),
                        j.to_string(),
                        num(r.empirical_covariance[i][j]),
                        num(r.covariance_se[i][j]),
                        num(r.predicted_covariance[i][j]),
                    ]);
                }
            }
            reports.push((l, m.label(), r));
        }
    }
    Ok(reports)
}

fn gauss_tables(k: usize) -> (Table, Table) {
    let mut h: Vec<String> = ["lambda", "mode", "replicate", "seed"].iter().map(|s| s.to_string()).collect();
    h.extend((0..k).map(|i| format!("raw_{i}")));
    h.extend((0..k).map(|i| format!("centered_scaled_{i}")));
    (Table { header: h, rows: Vec::new() }, Table::new(&["lambda", "mode", "i", "j", "empirical", "standard_error", "predicted"]))
}

fn c_for(c: &ExperimentConfig, nn: bool) -> Result<(f64, Option<CEstimate>)> {
    if let Some(v) = c.options.c_estimate {
        return Ok((v, None));
    }
    let lmax = lambdas(c)?.into_iter().fold(0.0, f64::max);
    let lc = c.options.c_lambda.unwrap_or(2.0 * lmax);
    let est = c_by_variance(c, lc, c.options.c_replicates.unwrap_or(c.replicates), nn)?;
    Ok((est.value, Some(est)))
}

fn reports_json(r: &[(f64, &'static str, GaussianityReport)]) -> Value {
    Value::Array(r.iter().map(|(l, m, g)| json!({ "lambda": l, "mode": m, "report": to_json(g) })).collect())
}

fn run_clt(c: &ExperimentConfig) -> Result<Outcome> {
    let base = base_field(c)?;
    let bx = boxes(c)?;
    let (c_hat, c_est) = c_for(c, false)?;
    let (mut rep, mut curves) = gauss_tables(bx.len());
    let reports = gauss_block(
        c,
        |l, m| Ok(rescaled_samples(&base, l, &bx, m, c.replicates)?),
        c_hat,
        c.options.jitter.unwrap_or(true),
        &mut rep,
        &mut curves,
    )?;
    Ok(Outcome {
        summary: json!({
            "experiment": "clt",
            "substrate": to_json(&c.substrate),
            "c_estimate": c_hat,
            "c_source": to_json(&c_est),
            "passed": reports.iter().all(|r| r.2.passed),
            "reports": reports_json(&reports),
        }),
        replicates: rep,
        curves,
        replicate_seeds: seeds(c, c.replicates),
    })
}

fn run_nn(c: &ExperimentConfig) -> Result<Outcome> {
    let base = base_field(c)?;
    let (mut rep, mut curves) = if c.boxes.is_empty() { (Table::default(), Table::default()) } else { gauss_tables(c.boxes.len()) };
    let mut summary = json!({ "experiment": "nn", "tau": c.tau });
    if !c.boxes.is_empty() {
        let bx = boxes(c)?;
        let (c_hat, c_est) = c_for(c, true)?;
        let reports = gauss_block(
            c,
            |l, m| Ok(nn_rescaled_samples(&base, l, &bx, m, c.replicates)?),
            c_hat,
            c.options.jitter.unwrap_or(false),
            &mut rep,
            &mut curves,
        )?;
        summary["c_estimate"] = json!(c_hat);
        summary["c_source"] = to_json(&c_est);
        summary["passed"] = json!(reports.iter().all(|r| r.2.passed));
        summary["reports"] = reports_json(&reports);
    }
    if c.options.probe.n_probes > 0 {
        let st = stabilization_radius(&base, &c.options.probe)?;
        // the tail shares the covariance table's columns
        if curves.header.is_empty() {
            curves = Table::new(&["lambda", "mode", "i", "j", "empirical", "standard_error", "predicted"]);
        }
        for (t, p) in &st.tail {
            curves.push(vec![
                num(*t),
                "stabilization_tail".into(),
                String::new(),
                String::new(),
                num(p.value),
                num(p.standard_error),
                String::new(),
            ]);
        }
        summary["stabilization"] = json!({
            "censored": st.censored,
            "tail": to_json(&st.tail),
            "fit": to_json(&st.fit),
            "config": to_json(&st.config),
            "note": "adversarial insertions are single points on a finite grid",
        });
    }
    if rep.header.is_empty() {
        rep = Table::new(&["lambda", "mode", "replicate", "seed"]);
    }
    Ok(Outcome { summary, replicates: rep, curves, replicate_seeds: seeds(c, c.replicates) })
}

fn run_boundary(c: &ExperimentConfig) -> Result<Outcome> {
    let base = base_field(c)?;
    let house = c.house_region()?;
    let s = boundary_scaling(&base, &lambdas(c)?, &house, c.replicates)?;
    let sd = seeds(c, c.replicates);
    let mut rep = Table::new(&["lambda", "replicate", "seed", "plus", "minus"]);
    for r in &s.rows {
        for (i, (p, m)) in r.per_replicate.iter().enumerate() {
            rep.push(vec![num(r.lambda), i.to_string(), sd[i].to_string(), p.to_string(), m.to_string()]);
        }
    }
    let mut curves = Table::new(&["kind", "x", "value", "standard_error"]);
    for r in &s.rows {
        curves.push(vec!["mean".into(), num(r.lambda), num(r.mean), num(r.mean_se)]);
        curves.push(vec!["variance".into(), num(r.lambda), num(r.variance), String::new()]);
    }
    for (b, n) in &s.depth_histogram {
        curves.push(vec!["depth_histogram".into(), num(*b), n.to_string(), String::new()]);
    }
    let rows: Vec<Value> = s
        .rows
        .iter()
        .map(|r| json!({ "lambda": r.lambda, "mean_plus": r.mean_plus, "mean_minus": r.mean_minus, "mean": r.mean, "mean_se": r.mean_se, "variance": r.variance, "depth_p99": r.max_depth }))
        .collect();
    Ok(Outcome {
        summary: json!({
            "experiment": "boundary",
            "dim": c.dim,
            "tau": c.tau,
            "rows": rows,
            "mean_fit": to_json(&s.mean_fit),
            "variance_fit": to_json(&s.variance_fit),
            "expected_slope": (c.dim - 1) as f64,
            "dropped_lambdas": to_json(&s.dropped),
        }),
        replicates: rep,
        curves,
        replicate_seeds: sd,
    })
}

fn run_cones(c: &ExperimentConfig) -> Result<Outcome> {
    let base = base_field(c)?;
    let betas = if c.options.betas.is_empty() { vec![default_beta(c.tau)] } else { c.options.betas.clone() };
    let reps = cone_tail_sweep(&base, &c.options.r_grid, &betas, c.replicates)?;
    let sd = seeds(c, c.replicates);
    let mut rep = Table::new(&["beta", "replicate", "seed", "needed_radius"]);
    let mut curves = Table::new(&["beta", "radius", "escape", "standard_error", "censored"]);
    for r in &reps {
        for (i, v) in r.needed.iter().enumerate() {
            rep.push(vec![num(r.beta), i.to_string(), sd[i].to_string(), num(*v)]);
        }
        for row in &r.rows {
            curves.push(vec![
                num(r.beta),
                num(row.radius),
                num(row.escape.value),
                num(row.escape.standard_error),
                row.censored.to_string(),
            ]);
        }
    }
    let fits: Vec<Value> = reps
        .iter()
        .map(|r| json!({ "beta": r.beta, "fit": to_json(&r.fit), "capped": r.capped, "monotone": r.rows.windows(2).all(|w| w[1].escape.value <= w[0].escape.value) }))
        .collect();
    Ok(Outcome { summary: json!({ "experiment": "cones", "tau": c.tau, "sweep": fits }), replicates: rep, curves, replicate_seeds: sd })
}

fn run_oracle(c: &ExperimentConfig) -> Result<Outcome> {
    let o = &c.options;
    let mut curves = Table::new(&["kind", "x", "value", "standard_error"]);
    for &t in &o.taus {
        curves.push(vec!["renyi_density".into(), num(t), num(renyi_density_oracle(t)?), "0".into()]);
    }
    let mut rep = Table::new(&["trial", "seed", "lazy", "brute_force", "agree", "cone_radius", "room"]);
    let mut summary = json!({ "experiment": "oracle", "renyi_taus": to_json(&o.taus) });
    let mut sd = Vec::new();
    if o.sigma_trials > 0 {
        let base = base_field(c)?;
        let h = o.box_halfwidth;
        let outer = padded_box::<f64>(c.dim, h + o.margin)?;
        let outer_box = outer.as_box().expect("one box").clone();
        let rows = replicate_map(o.sigma_trials, |i| {
            let f = replicate_field(&base, i);
            let mut rng = stream_rng(key(f.master_seed(), stream::AUX, &[3]));
            let x: Vec<f64> = (0..c.dim).map(|_| uniform(&mut rng, -h, h)).collect();
            let w = SpaceTimePoint::new(&x, uniform(&mut rng, 0.0, c.tau));
            let lazy = sigma_infinite_with_diagnostics(&w, &f)?;
            let brute = brute_force_sigma_oracle(&f, h, o.margin, &w).map_err(|e| packlab::Error::Numerical(e.to_string()))?;
            Ok((f.master_seed(), lazy.accepted, brute, lazy.diagnostics.spatial_radius, outer_box.boundary_distance(&w.x)))
        })?;
        let mut disagree = 0;
        let mut attributed = 0;
        for (i, (s, a, b, r, room)) in rows.iter().enumerate() {
            sd.push(*s);
            if a != b {
                disagree += 1;
                // the realised cone reaches within a diameter of the box edge
                if r + 2.0 >= *room {
                    attributed += 1;
                }
            }
            rep.push(vec![i.to_string(), s.to_string(), a.to_string(), b.to_string(), (a == b).to_string(), num(*r), num(*room)]);
        }
        let n = rows.len() as f64;
        summary["sigma"] = json!({
            "trials": rows.len(),
            "agreement_rate": (n - disagree as f64) / n,
            "disagreements": disagree,
            "attributed_to_cone_exceeding_margin": attributed,
            "box_halfwidth": h,
            "margin": o.margin,
        });
    }
    Ok(Outcome { summary, replicates: rep, curves, replicate_seeds: sd })
}
