//! Acceptance suite. Each test checks one criterion at its stated tolerance
//! and writes a single PASS/FAIL line straight to stdout, so the verdicts
//! show up even when the harness captures output.
//!
//! All random inputs derive from one master seed fixed before any run.
//!
//! A FAIL verdict is printed but only panics when `PACKLAB_ACCEPTANCE_STRICT`
//! is set: several criteria are statistical and fail at a known rate even
//! for a correct implementation. Fixture exactness and determinism, and any
//! experiment that errors, always panic.

use std::io::Write;

use packlab::input::rng::derive_seed;
use packlab::input::{Aabb, CellKey, Region, SpaceTimePoint};
use packlab::limits::boundary_split;
use packlab::nn::{nn_measure, NnGraph};
use packlab::packing::{backward_cone, build_causal_graph, desorb_sequential, grow_sequential, jam_sites, overlaps, pack_flags};
use packlab_cli::outputs::{CURVES, REPLICATES, SUMMARY};
use packlab_cli::{execute, run, ExperimentConfig};
use serde_json::Value;

const MASTER_SEED: u64 = 20261016;

fn seed(criterion: u64) -> u64 {
    derive_seed(MASTER_SEED, criterion)
}

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(out, "acceptance {id:>2} {name:<28} {verdict}  {detail}").unwrap();
    out.flush().unwrap();
    if std::env::var_os("PACKLAB_ACCEPTANCE_STRICT").is_some() {
        assert!(pass, "criterion {id} ({name}) failed: {detail}");
    }
}

/// For criteria that are exact rather than statistical: always asserted.
fn report_exact(id: u32, name: &str, pass: bool, detail: &str) {
    report(id, name, pass, detail);
    assert!(pass, "criterion {id} ({name}) failed: {detail}");
}

fn config(text: &str, seed: u64) -> ExperimentConfig {
    let mut c = ExperimentConfig::from_toml(text).expect("valid config");
    c.seed = seed;
    c
}

fn summary(text: &str, s: u64) -> Value {
    execute(&config(text, s)).expect("experiment runs").summary
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn p1(x: f64, t: f64) -> SpaceTimePoint<f64> {
    SpaceTimePoint::new(&[x], t)
}

fn site(i: i64) -> CellKey {
    [i].into_iter().collect()
}

#[test]
fn criterion_01_fixture_exactness() {
    let mut bad: Vec<&str> = Vec::new();
    let mut check = |ok: bool, name: &'static str| {
        if !ok {
            bad.push(name);
        }
    };

    check(overlaps(&[0.0], &[1.9]).unwrap(), "overlap 1.9");
    check(!overlaps(&[0.0], &[2.0]).unwrap(), "contact at 2 is not overlap");
    check(overlaps(&[0.0, 0.0], &[1.2, 1.2]).unwrap(), "overlap in the plane");

    let chain = vec![p1(0.0, 0.1), p1(1.0, 0.2), p1(2.5, 0.3)];
    check(pack_flags::<f64>(&[]).is_empty(), "empty packing");
    check(pack_flags(&chain[..1]) == vec![true], "single point packed");
    check(pack_flags(&chain) == vec![true, false, true], "packing chain");

    let g = build_causal_graph(&chain);
    check(g.edges() == vec![(0, 1), (1, 2)], "chain edges");
    check(build_causal_graph(&[p1(0.0, 0.1), p1(2.0, 0.2)]).edges() == vec![(0, 1)], "edge at distance 2");
    check(build_causal_graph(&[p1(0.0, 0.1), p1(3.0, 0.2), p1(6.0, 0.3)]).edge_count() == 0, "isolated points");

    let c = backward_cone(&chain[2], &chain);
    check(c.members == chain, "cone of the last chain point");
    check(backward_cone(&chain[1], &chain).members == chain[..2].to_vec(), "cone of the middle point");
    let lone = [p1(0.0, 0.1), p1(10.0, 0.2)];
    let c = backward_cone(&lone[1], &lone);
    check(c.members.len() == 1 && c.spatial_radius == 0.0, "isolated cone");

    let sites = vec![(site(0), 0.2), (site(1), 0.5), (site(2), 0.1)];
    check(jam_sites(&sites).unwrap() == vec![site(0), site(2)], "three-site lattice jam");
    check(jam_sites(&[(site(4), 3.0)]).unwrap() == vec![site(4)], "single site");

    let (present, _) = desorb_sequential(&[p1(0.0, 0.1).with_lifetime(0.05), p1(0.5, 0.2)], 1.0).unwrap();
    check(present == vec![false, true], "desorption sweep");

    check(grow_sequential(&[p1(0.0, 0.0), p1(0.5, 0.8)], 1.0, 0.0).unwrap() == vec![true, false], "growth rejects");
    let seeds = [p1(0.0, 0.0), p1(5.0, 0.5), p1(1.5, 1.0)];
    check(grow_sequential(&seeds, 1.0, 0.0).unwrap() == vec![true; 3], "growth keeps all");

    let m = NnGraph::new(vec![vec![0.0], vec![3.0]]).measure();
    check(m.weights == vec![1.5, 1.5] && m.total() == 3.0, "two-point NN weights");
    let m = NnGraph::new(vec![vec![0.0], vec![1.0], vec![5.0]]).measure();
    check(m.weights == vec![0.5, 2.5, 2.0] && m.total() == 5.0, "three-point NN weights");
    let whole = Region::from_box(Aabb::new(&[-1.0], &[6.0]).unwrap());
    check(nn_measure(&[vec![0.0], vec![1.0], vec![5.0]], &whole) == 5.0, "NN measure of a region");

    let house = Region::from_box(Aabb::new(&[0.0], &[3.0]).unwrap());
    let split = boundary_split(&[p1(0.5, 0.2), p1(2.6, 0.3)], &[p1(-1.0, 0.1)], &house);
    check((split.plus, split.minus) == (1, 0), "boundary split");

    let detail = if bad.is_empty() { "all fixtures exact".to_string() } else { format!("mismatches: {}", bad.join(", ")) };
    report_exact(1, "fixture exactness", bad.is_empty(), &detail);
}

#[test]
fn criterion_02_infinite_volume_oracle() {
    let mut pass = true;
    let mut parts = Vec::new();
    for d in [1, 2] {
        let s = summary(
            &format!("experiment = \"oracle\"\ndim = {d}\ntau = 1.0\n[options]\ntaus = []\nsigma_trials = 10000\nbox_halfwidth = 5.0\nmargin = 20.0\n"),
            seed(2) + d as u64,
        );
        let sg = &s["sigma"];
        let rate = f(&sg["agreement_rate"]);
        let dis = sg["disagreements"].as_u64().unwrap();
        let att = sg["attributed_to_cone_exceeding_margin"].as_u64().unwrap();
        pass &= rate >= 0.999 && dis == att;
        parts.push(format!("d={d}: agreement {rate} ({dis} disagreements, {att} attributed)"));
    }
    report(2, "infinite-volume oracle", pass, &parts.join("; "));
}

#[test]
fn criterion_03_density_law() {
    let mut pass = true;
    let mut parts = Vec::new();
    for tau in [1.0, 5.0] {
        let s = summary(
            &format!(
                "experiment = \"pack\"\ndim = 1\ntau = {tau:?}\nmode = \"both\"\nreplicates = 100\nhouse = [{{ lower = [0.0], upper = [10000.0] }}]\n"
            ),
            seed(3) + tau as u64,
        );
        for mode in ["infinite", "finite"] {
            let e = &s["modes"][mode];
            pass &= e["within_3se"].as_bool().unwrap();
            parts.push(format!(
                "tau={tau} {mode}: {:.5} vs {:.5} (z={:.2})",
                f(&e["mean_density"]),
                f(&e["oracle_density"]),
                f(&e["z_score"])
            ));
        }
    }
    report(3, "d=1 density law", pass, &parts.join("; "));
}

#[test]
fn criterion_04_time_decay() {
    let s = summary(
        "experiment = \"correlate\"\ndim = 1\ntau = 20.0\nreplicates = 50\n[options]\n\
         t_grid = [2.0, 3.0, 4.0, 6.0, 8.0, 11.0, 14.0, 17.0, 20.0]\nwindow_side = 2000.0\nbin_edges = []\nseparations = []\n",
        seed(4),
    );
    let slope = f(&s["r1_loglog_fit"]["slope"]);
    let mut pass = (-2.3..=-1.7).contains(&slope);
    let mut parts = vec![format!("continuum log-log slope {slope:.3}")];
    for (d, side) in [(1, 10000.0), (2, 200.0)] {
        let s = summary(
            &format!(
                "experiment = \"correlate\"\ndim = {d}\nsubstrate = \"lattice\"\nreplicates = 50\n[options]\n\
                 t_grid = [0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0]\nwindow_side = {side:?}\n"
            ),
            seed(4) + d as u64,
        );
        let rate = f(&s["r1_decay"]["rate"]);
        let below = s["r1_below_exp_bound"].as_bool().unwrap();
        pass &= rate > 0.0 && below;
        parts.push(format!("lattice d={d}: rate {rate:.3}, below exp(-t)+3SE {below}"));
    }
    report(4, "time decay", pass, &parts.join("; "));
}

#[test]
fn criterion_05_clustering() {
    let seps: Vec<String> = (0..=16).map(|k| format!("{:?}", 4.0 + 0.5 * k as f64)).collect();
    let s = summary(
        &format!(
            "experiment = \"correlate\"\ndim = 1\ntau = 1.0\nreplicates = 200000\n[options]\nt_grid = []\nbin_edges = []\n\
             separations = [{}]\ncluster_times = [0.5, 0.5]\n",
            seps.join(", ")
        ),
        seed(5),
    );
    let cl = &s["clustering"];
    let fit = &cl["gap_fit"];
    let rate = f(&fit["rate"]);
    let rows = cl["rows"].as_array().unwrap();
    let bound = rows.iter().all(|r| r["bound_holds"].as_bool().unwrap());
    let pass = rate > 0.0 && bound;
    let detail = format!(
        "gap decay rate {rate:.3} (r2 {:.3}, {} usable points over {:?}), bound gap <= {}*sqrt(P) + 3SE holds at {}/{} separations",
        f(&fit["r_squared"]),
        fit["n_used"],
        fit["fit_range"].as_array().map(|a| a.iter().map(f).collect::<Vec<_>>()),
        f(&cl["bound_constant"]),
        rows.iter().filter(|r| r["bound_holds"].as_bool().unwrap()).count(),
        rows.len()
    );
    report(5, "clustering", pass, &detail);
}

#[test]
fn criterion_06_cone_tails() {
    let s = summary(
        "experiment = \"cones\"\ndim = 1\ntau = 1.0\nreplicates = 4000000\n[options]\n\
         r_grid = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]\nbetas = [4.0]\n",
        seed(6),
    );
    let sw = &s["sweep"][0];
    let fit = &sw["fit"];
    let (rate, r2) = (f(&fit["rate"]), f(&fit["r_squared"]));
    let monotone = sw["monotone"].as_bool().unwrap();
    let pass = monotone && rate > 0.0 && r2 >= 0.9;
    let detail = format!(
        "non-increasing {monotone}, log slope {:.3}, r2 {r2:.4}, {} of 9 radii usable, {} capped",
        -rate, fit["n_used"], sw["capped"]
    );
    report(6, "cone tails", pass, &detail);
}

const FOUR_BOXES: &str = "boxes = [\n  { lower = [0.0], upper = [1.0] },\n  { lower = [2.0], upper = [3.0] },\n  \
                          { lower = [4.0], upper = [5.0] },\n  { lower = [4.5], upper = [5.5] },\n]\n\
                          house = [{ lower = [0.0], upper = [6.0] }]\n";

fn gaussian_detail(s: &Value) -> (bool, String) {
    let mut parts = vec![format!("C={:.5}", f(&s["c_estimate"]))];
    for r in s["reports"].as_array().unwrap() {
        let g = &r["report"];
        let skew: Vec<String> = g["boxes"].as_array().unwrap().iter().map(|b| format!("{:.3}", f(&b["skewness"]))).collect();
        let fails: Vec<&str> = g["failures"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
        parts.push(format!(
            "{}: skew [{}], max cov dev {:.3}, max zero-entry z {:.2}{}",
            r["mode"].as_str().unwrap(),
            skew.join(", "),
            f(&g["max_relative_deviation"]),
            f(&g["max_zero_entry_z"]),
            if fails.is_empty() { String::new() } else { format!(", failures: {}", fails.join("; ")) }
        ));
    }
    (s["passed"].as_bool().unwrap(), parts.join("; "))
}

#[test]
fn criterion_07_gaussian_clt() {
    let s = summary(
        &format!(
            "experiment = \"clt\"\ndim = 1\ntau = 1.0\nmode = \"both\"\nlambdas = [64.0]\nreplicates = 1000\n{FOUR_BOXES}\
             [options]\nc_lambda = 256.0\nc_replicates = 10000\n"
        ),
        seed(7),
    );
    let (pass, detail) = gaussian_detail(&s);
    report(7, "gaussian clt", pass, &detail);
}

#[test]
fn criterion_08_covariance_constant() {
    let edges: Vec<String> = (0..=40).map(|k| format!("{:?}", 0.25 * k as f64)).collect();
    let s = summary(
        &format!(
            "experiment = \"correlate\"\ndim = 1\ntau = 1.0\nreplicates = 400\nlambdas = [64.0, 128.0, 256.0]\n[options]\n\
             t_grid = []\nseparations = []\npair_window = 1000.0\nbin_edges = [{}]\n",
            edges.join(", ")
        ),
        seed(8),
    );
    let (cc, cv, r1) = (f(&s["c_corr"]["value"]), f(&s["c_var"]["value"]), f(&s["intensity"]["value"]));
    let rel = f(&s["c_relative_difference"]);
    let pass = rel <= 0.15 && cc < r1 && cv < r1;
    report(8, "covariance constant", pass, &format!("C corr {cc:.5}, C var {cv:.5}, relative difference {rel:.3}, intensity {r1:.5}"));
}

#[test]
fn criterion_09_boundary_scaling() {
    let mut pass = true;
    let mut parts = Vec::new();
    for (d, house) in [(2, "{ lower = [0.0, 0.0], upper = [1.0, 1.0] }"), (1, "{ lower = [0.0], upper = [1.0] }")] {
        let s = summary(
            &format!(
                "experiment = \"boundary\"\ndim = {d}\ntau = 1.0\nreplicates = 200\nlambdas = [8.0, 16.0, 32.0, 64.0]\nhouse = [{house}]\n"
            ),
            seed(9) + d as u64,
        );
        let (m, v) = (&s["mean_fit"], &s["variance_fit"]);
        let (ms, vs) = (f(&m["slope"]), f(&v["slope"]));
        let (mr, vr) = (f(&m["r_squared"]), f(&v["r_squared"]));
        let target = (d - 1) as f64;
        let ok = if d == 2 {
            (ms - target).abs() <= 0.3 && (vs - target).abs() <= 0.3 && mr >= 0.9 && vr >= 0.9
        } else {
            (ms - target).abs() <= 0.3 && (vs - target).abs() <= 0.3
        };
        pass &= ok;
        parts.push(format!("d={d}: mean slope {ms:.3} (r2 {mr:.3}), variance slope {vs:.3} (r2 {vr:.3})"));
    }
    report(9, "boundary scaling", pass, &parts.join("; "));
}

#[test]
fn criterion_10_nn_measures() {
    let s = summary(
        &format!(
            "experiment = \"nn\"\ndim = 1\ntau = 1.0\nmode = \"both\"\nlambdas = [64.0]\nreplicates = 1000\n{FOUR_BOXES}\
             [options]\nc_lambda = 256.0\nc_replicates = 10000\n[options.probe]\nn_probes = 5000\n\
             t_grid = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]\n"
        ),
        seed(10),
    );
    let st = &s["stabilization"];
    let (rate, r2) = (f(&st["fit"]["rate"]), f(&st["fit"]["r_squared"]));
    let tail_ok = rate > 0.0 && r2 >= 0.9;
    let (gauss_ok, gauss) = gaussian_detail(&s);
    let detail = format!(
        "stabilisation tail log slope {:.3}, r2 {r2:.3}, {} usable times, {} censored; {gauss}",
        -rate, st["fit"]["n_used"], st["censored"]
    );
    report(10, "nn measures", tail_ok && gauss_ok, &detail);
}

#[test]
fn criterion_11_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let experiments = [
        "experiment = \"pack\"\ndim = 2\ntau = 1.0\nmode = \"both\"\nreplicates = 24\nhouse = [{ lower = [0.0, 0.0], upper = [30.0, 30.0] }]\n"
            .to_string(),
        format!(
            "experiment = \"clt\"\ndim = 1\ntau = 1.0\nmode = \"both\"\nlambdas = [16.0]\nreplicates = 200\n{FOUR_BOXES}\
             [options]\nc_replicates = 200\nlilliefors_sims = 50\n"
        ),
        "experiment = \"correlate\"\ndim = 1\ntau = 2.0\nreplicates = 40\nlambdas = [16.0, 32.0]\n[options]\n\
         t_grid = [0.5, 1.0, 2.0]\nwindow_side = 200.0\npair_window = 200.0\nseparations = [4.0, 6.0]\n"
            .to_string(),
        "experiment = \"boundary\"\ndim = 2\ntau = 1.0\nreplicates = 16\nlambdas = [4.0, 8.0, 16.0]\n".to_string(),
        "experiment = \"cones\"\ndim = 2\ntau = 1.0\nreplicates = 400\n".to_string(),
        format!(
            "experiment = \"nn\"\ndim = 1\ntau = 1.0\nmode = \"both\"\nlambdas = [16.0]\nreplicates = 200\n{FOUR_BOXES}\
             [options]\nc_replicates = 200\nlilliefors_sims = 50\n[options.probe]\nn_probes = 200\n"
        ),
        "experiment = \"oracle\"\ndim = 2\ntau = 1.0\n[options]\nsigma_trials = 200\n".to_string(),
    ];
    let mut differing = Vec::new();
    for (k, text) in experiments.iter().enumerate() {
        let c = config(text, seed(11) + k as u64);
        let name = format!("{:?}", c.experiment).to_lowercase();
        let outs: Vec<_> = [1, 8]
            .iter()
            .map(|&w| {
                let out = dir.path().join(format!("{k}-{w}"));
                run(&c, w, Some(&out)).expect("experiment runs");
                out
            })
            .collect();
        for file in [SUMMARY, REPLICATES, CURVES] {
            if std::fs::read(outs[0].join(file)).unwrap() != std::fs::read(outs[1].join(file)).unwrap() {
                differing.push(format!("{name}/{file}"));
            }
        }
    }
    let detail = if differing.is_empty() {
        format!("{} experiments byte-identical at 1 and 8 workers", experiments.len())
    } else {
        format!("differ: {}", differing.join(", "))
    };
    report_exact(11, "determinism", differing.is_empty(), &detail);
}
