//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use bilevel_core::calculus::{
    coderivative_smooth, derivative_bundle, scalarized_subdifferential, verify_bundle, DerivativeTrees,
};
use bilevel_core::cli::{ProblemFile, ReportFile};
use bilevel_core::config::oracle::{ANGULAR_RESOLUTION_DEG, RATIO_THRESHOLD};
use bilevel_core::config::{FiniteDifference, Tolerances};
use bilevel_core::expr::{parse, Var};
use bilevel_core::model::{BilevelProblem, BoxSet, Candidate, LowerSet, Polyhedron, SmoothFunction};
use bilevel_core::oracle::{
    angular_hausdorff_deg, axis_samples, circle_directions, estimate_calmness, estimate_lipschitz_like,
    random_directions, sample_frechet_coderivative, sample_frechet_normal_cone, sample_limiting_normal_cone,
    solve_lower_grid, verify_optimistic_local, GridSpec, MembershipSet, OracleError, SampleBudget, SegmentUnion,
};
use bilevel_core::polyhedral::{
    limiting_normal_cone_gph_box, limiting_normal_cone_gph_polyhedron, normal_cone_polyhedron, GraphCaps,
};
use bilevel_core::stationarity::{
    check_m_stationarity, check_qualification, explain_certificate, StationarityOptions, StationarityOutcome,
};

const SEED: u64 = 0x5eed_b11e;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn manifest() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn fixtures() -> PathBuf {
    manifest().join("tests/fixtures")
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_bilevel"))
        .args(args)
        .current_dir(fixtures())
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

fn without_timing(report: &str) -> String {
    let mut lines: Vec<&str> = report.lines().collect();
    if let Some(pos) = lines.iter().position(|l| l.trim_start().starts_with("\"timing_ms\"")) {
        lines.remove(pos);
        lines[pos - 1] = lines[pos - 1].trim_end_matches(',');
    }
    let mut s = lines.join("\n");
    s.push('\n');
    s
}

fn load(file: &str) -> (BilevelProblem, Vec<Candidate>) {
    let text = std::fs::read_to_string(fixtures().join(file)).unwrap();
    let loaded = ProblemFile::load(&text).unwrap();
    let cands = loaded
        .candidates
        .iter()
        .map(|c| Candidate::new(&loaded.problem, c.x.clone(), c.y.clone()).unwrap())
        .collect();
    (loaded.problem, cands)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    v.iter().map(|a| a / n).collect()
}

/// A polyhedron through the integer point `x̄` with `1..=5` rows, at least
/// one active, all active rows strictly negative on a common direction.
fn random_polyhedron(d: usize, rng: &mut StdRng) -> (Polyhedron, Vec<f64>) {
    let x_bar: Vec<f64> = (0..d).map(|_| rng.random_range(-2i32..=2) as f64).collect();
    let w = unit(&(0..d).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>());
    let rows = rng.random_range(1..=5usize);
    let active = rng.random_range(1..=rows);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for i in 0..rows {
        let row = loop {
            let r: Vec<f64> = (0..d).map(|_| rng.random_range(-3i32..=3) as f64).collect();
            let n = norm(&r);
            if n == 0.0 {
                continue;
            }
            let s: f64 = r.iter().zip(&w).map(|(p, q)| p * q).sum();
            if i >= active || s <= -0.3 * n {
                break r;
            }
        };
        let at: f64 = row.iter().zip(&x_bar).map(|(p, q)| p * q).sum();
        b.push(if i < active {
            at
        } else {
            at + rng.random_range(1i32..=4) as f64
        });
        a.push(row);
    }
    (Polyhedron::new(d, a, b).unwrap(), x_bar)
}

fn ac1() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let budget = SampleBudget::default();
    let (mut worst_generator, mut worst_in, mut classified_in, mut total) = (f64::NEG_INFINITY, 0.0f64, 0, 0);
    for k in 0..50 {
        let d = 1 + k % 3;
        let (p, x_bar) = random_polyhedron(d, &mut rng);
        let exact = normal_cone_polyhedron(&p, &x_bar, 0.0).unwrap();
        let set = MembershipSet::new(d, |v: &[f64]| p.contains(v, 0.0));
        let generators: Vec<Vec<f64>> = exact.generators().unwrap().rays.iter().map(|g| unit(g)).collect();
        if !generators.is_empty() {
            let s = sample_frechet_normal_cone(&set, &x_bar, &generators, &budget, &mut rng).unwrap();
            for c in &s.directions {
                worst_generator = c.ratios.iter().copied().fold(worst_generator, f64::max);
            }
        }
        let mut dirs = random_directions(d, 64, &mut rng);
        if generators.len() > 1 {
            let sum: Vec<f64> = (0..d).map(|j| generators.iter().map(|g| g[j]).sum()).collect();
            if norm(&sum) > 1e-9 {
                dirs.push(unit(&sum));
            }
        }
        let s = sample_frechet_normal_cone(&set, &x_bar, &dirs, &budget, &mut rng).unwrap();
        for c in s.directions.iter() {
            total += 1;
            if c.normal {
                classified_in += 1;
                worst_in = worst_in.max(exact.contains(&c.direction, 0.0).unwrap().violation);
            }
        }
    }
    let pass = worst_generator <= 1e-6 && worst_in <= 1e-8;
    outcome(
        pass,
        format!(
            "50 polyhedra; max generator ratio {worst_generator:.2e} (≤ 1e-6); {classified_in}/{total} directions IN at ratio ≤ {RATIO_THRESHOLD:e}, max exact-cone violation {worst_in:.2e} (≤ 1e-8)"
        ),
    )
}

fn ac2() -> Outcome {
    let b = BoxSet::new(vec![0.0], vec![1.0]).unwrap();
    let graph = SegmentUnion::new(
        2,
        vec![
            (vec![0.0, 0.0], vec![1.0, 0.0]),
            (vec![0.0, 0.0], vec![0.0, -10.0]),
            (vec![1.0, 0.0], vec![1.0, 10.0]),
        ],
    )
    .unwrap();
    let dirs = circle_directions(1.0);
    let budget = SampleBudget {
        points: 4_000,
        ..SampleBudget::default()
    };
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    let mut all_equal = true;
    let cases = [
        ("interior", 0.5, 0.0),
        ("lower-corner", 0.0, 0.0),
        ("upper-corner", 1.0, 0.0),
        ("lower-strict", 0.0, -1.0),
        ("upper-strict", 1.0, 1.0),
    ];
    let mut notes = Vec::new();
    for (name, y, z) in cases {
        let boxed = limiting_normal_cone_gph_box(&b, &[y], &[z], 1e-9, GraphCaps::default())
            .unwrap()
            .to_union();
        let general = limiting_normal_cone_gph_polyhedron(&b.to_polyhedron(), &[y], &[z], 1e-9, GraphCaps::default())
            .unwrap()
            .to_union();
        let equal = boxed.same_as(&general).unwrap();
        all_equal &= equal;
        let sampled = sample_limiting_normal_cone(&graph, &[y, z], &dirs, &budget, &mut rng).unwrap();
        let exact: Vec<Vec<f64>> = dirs
            .iter()
            .filter(|d| boxed.contains(d, 1e-9).unwrap())
            .cloned()
            .collect();
        let h = angular_hausdorff_deg(&sampled, &exact);
        worst = worst.max(h);
        notes.push(format!("{name} {h:.0}°{}", if equal { "" } else { " (LP mismatch)" }));
    }
    outcome(
        worst <= ANGULAR_RESOLUTION_DEG && all_equal,
        format!(
            "{}; max Hausdorff {worst:.1}° (≤ {ANGULAR_RESOLUTION_DEG}°); box vs inequality form mutually contained: {all_equal}",
            notes.join(", ")
        ),
    )
}

fn ac3() -> Outcome {
    let b = BoxSet::new(vec![0.0], vec![f64::INFINITY]).unwrap();
    let union = limiting_normal_cone_gph_box(&b, &[0.0], &[0.0], 1e-9, GraphCaps::default())
        .unwrap()
        .to_union();
    let u = [1.0, 0.0];
    let w = [0.0, 1.0];
    let mid = [0.5, 0.5];
    let in_u = union.containing_branch(&u, 1e-9).unwrap().map(str::to_owned);
    let in_w = union.containing_branch(&w, 1e-9).unwrap().map(str::to_owned);
    let in_mid = union.contains(&mid, 1e-9).unwrap();
    let pass = in_u.is_some() && in_w.is_some() && !in_mid;
    outcome(
        pass,
        format!(
            "u=(1,0) ∈ {}, w=(0,1) ∈ {}, (u+w)/2=(½,½) in union: {in_mid}",
            in_u.as_deref().unwrap_or("none"),
            in_w.as_deref().unwrap_or("none")
        ),
    )
}

/// Brute-force value tolerance, the CLI default for `verify`.
const GRID_VALUE_TOL: f64 = 1e-2;

const CURATED: [&str; 7] = [
    "quadratic.json",
    "unit_box_corner.json",
    "omega_bound.json",
    "two_followers.json",
    "complementarity_corner.json",
    "simplex_follower.json",
    "trivial.json",
];

fn ac4() -> Outcome {
    let opts = StationarityOptions::default();
    let tol = Tolerances::default();
    let mut notes = Vec::new();
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for file in CURATED {
        let (p, cands) = load(file);
        let c = &cands[0];
        let grid = GridSpec::new(vec![-0.5; p.m], vec![2.5; p.m], 61, 20, 1e-9).unwrap();
        let local = verify_optimistic_local(&p, c, 0.25, &grid, GRID_VALUE_TOL)
            .unwrap()
            .locally_optimal;
        let q = check_qualification(&p, c, &opts).unwrap().holds;
        let outcome = check_m_stationarity(&p, c, &opts).unwrap();
        let certified = match &outcome {
            StationarityOutcome::Stationary(cert) => {
                let bundle = derivative_bundle(&p, c).unwrap();
                match explain_certificate(&p, c, cert, &bundle, &tol, GraphCaps::default()) {
                    Ok(r) => {
                        worst = worst.max(r.equation_residual()).max(r.cone_margin);
                        true
                    }
                    Err(_) => false,
                }
            }
            StationarityOutcome::NotStationary { .. } => false,
        };
        if local && q && !certified {
            pass = false;
        }
        if outcome.certificate().is_some() && !certified {
            pass = false;
        }
        if !local {
            pass = false;
        }
        notes.push(format!(
            "{}:{}{}",
            file.trim_end_matches(".json"),
            if certified { "certified" } else { "uncertified" },
            if local { "" } else { " (grid finds a better point)" }
        ));
    }
    let (p, cands) = load("quadratic.json");
    let cert = check_m_stationarity(&p, &cands[0], &opts).unwrap();
    let cert = cert.certificate().unwrap();
    let quad = cert.gamma == [1.0] && cert.beta == [0.0] && cert.residuals.equation <= 1e-9;
    pass &= quad && worst <= 1e-9;
    outcome(
        pass,
        format!(
            "{} instances locally optimal by grid (value tol {GRID_VALUE_TOL:e}) with qualification; {}; quadratic γ={:?} β={:?}; max recomputed residual {worst:.1e} (≤ 1e-9)",
            CURATED.len(),
            notes.join(" "),
            cert.gamma,
            cert.beta
        ),
    )
}

fn ac5() -> Outcome {
    let (code_origin, _) = run_cli(&["check", "quadratic.json", "--candidate", "1"]);
    let (code_degenerate, out) = run_cli(&["check", "degenerate.json"]);
    let witness_norm = ReportFile::from_json(&out)
        .ok()
        .and_then(|r| r.qualification)
        .and_then(|q| q.witness)
        .map(|w| w.norm());
    let unit_witness = witness_norm.is_some_and(|n| (n - 1.0).abs() <= 1e-12);
    outcome(
        code_origin == 1 && code_degenerate == 2 && unit_witness,
        format!(
            "quadratic (0,0) exit {code_origin} (1); f ≡ 0 exit {code_degenerate} (2), witness norm {witness_norm:?}"
        ),
    )
}

const TERMS: [&str; 8] = [
    "sin(V)",
    "cos(V - W)",
    "V*W",
    "V^2",
    "exp(0.3*V)",
    "V^3/3",
    "sin(V*W)",
    "cos(V)^2",
];

fn random_component(vars: &[&str], rng: &mut StdRng) -> String {
    (0..rng.random_range(2..=4))
        .map(|_| {
            let t = TERMS[rng.random_range(0..TERMS.len())];
            let v = vars[rng.random_range(0..vars.len())];
            let w = vars[rng.random_range(0..vars.len())];
            let c = rng.random_range(-8i32..=8) as f64 / 4.0;
            format!("({c})*{}", t.replace('V', v).replace('W', w))
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

fn ac6() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let (mut scal_gap, mut sample_gap): (f64, f64) = (0.0, 0.0);
    for k in 0..20 {
        let m = 1 + k % 2;
        let outputs = 1 + (k / 2) % 2;
        let vars: Vec<String> = std::iter::once("x1".to_string())
            .chain((1..=m).map(|j| format!("y{j}")))
            .collect();
        let names: Vec<&str> = vars.iter().map(String::as_str).collect();
        let comps = (0..outputs)
            .map(|_| parse(&random_component(&names, &mut rng), 1, m).unwrap())
            .collect();
        let h = SmoothFunction::vector(1, m, comps);
        let p: Vec<f64> = (0..=m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..outputs).map(|_| rng.random_range(-2.0..2.0)).collect();
        let cod = coderivative_smooth(&h, &p, &w).unwrap();
        let sc = scalarized_subdifferential(&h, &w, &p).unwrap();
        let eval = |q: &[f64]| h.evaluate_joint(q).map_err(OracleError::from);
        let sampled = sample_frechet_coderivative(&eval, &p, &w, 1e-4, 40, &mut rng).unwrap();
        for j in 0..=m {
            scal_gap = scal_gap.max((cod[j] - sc[j]).abs());
            sample_gap = sample_gap.max((cod[j] - sampled.x_star[j]).abs());
        }
    }
    outcome(
        scal_gap <= 1e-5 && sample_gap <= 1e-5,
        format!("20 maps; |coderivative − scalarized| ≤ {scal_gap:.1e}, |coderivative − sampled| ≤ {sample_gap:.1e} (≤ 1e-5)"),
    )
}

fn random_polynomial(vars: &[String], rng: &mut StdRng) -> String {
    (0..rng.random_range(2..=5))
        .map(|_| {
            let c = rng.random_range(-12i32..=12) as f64 / 4.0;
            let mut term = format!("({c})");
            let mut degree = 0;
            while degree < 3 && rng.random_bool(0.7) {
                let v = &vars[rng.random_range(0..vars.len())];
                let e = rng.random_range(1..=3 - degree);
                degree += e;
                term += &format!("*{v}^{e}");
            }
            term
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

fn ac7() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let fd = FiniteDifference::default();
    let (mut failures, mut worst_sym): (usize, f64) = (0, 0.0);
    for k in 0..100 {
        let (n, m) = (1 + k % 2, 1 + (k / 2) % 2);
        let vars: Vec<String> = (1..=n)
            .map(|i| format!("x{i}"))
            .chain((1..=m).map(|j| format!("y{j}")))
            .collect();
        let upper = parse(&random_polynomial(&vars, &mut rng), n, m).unwrap();
        let lower = parse(&random_polynomial(&vars, &mut rng), n, m).unwrap();
        let p = BilevelProblem {
            n,
            m,
            upper: SmoothFunction::scalar(n, m, upper),
            lower: SmoothFunction::scalar(n, m, lower.clone()),
            omega: Polyhedron::whole_space(n),
            k: LowerSet::Box(BoxSet::unbounded(m)),
        };
        let point: Vec<f64> = (0..n + m).map(|_| rng.random_range(-1.5..1.5)).collect();
        let c = Candidate::new(&p, point[..n].to_vec(), point[n..].to_vec()).unwrap();
        let bundle = DerivativeTrees::new(&p).bundle(&c.x, &c.y).unwrap();
        if verify_bundle(&p, &c, &bundle, &fd).is_err() {
            failures += 1;
        }
        for i in 0..n + m {
            for j in 0..i {
                let (vi, vj) = (Var::from_joint(i, n), Var::from_joint(j, n));
                let a = lower
                    .differentiate(vi)
                    .differentiate(vj)
                    .evaluate_joint(n, &point)
                    .unwrap();
                let b = lower
                    .differentiate(vj)
                    .differentiate(vi)
                    .evaluate_joint(n, &point)
                    .unwrap();
                worst_sym = worst_sym.max((a - b).abs());
            }
        }
        for i in 0..m {
            for j in 0..m {
                worst_sym = worst_sym.max((bundle.hess_yy[i][j] - bundle.hess_yy[j][i]).abs());
            }
        }
    }
    outcome(
        failures == 0 && worst_sym <= 1e-9,
        format!(
            "100 instances; finite-difference mismatches {failures} (rel tol {:e}); max Hessian asymmetry {worst_sym:.1e} (≤ 1e-9)",
            fd.rel_tol
        ),
    )
}

fn scalar_problem(lower: &str, k: LowerSet, m: usize) -> BilevelProblem {
    BilevelProblem {
        n: 1,
        m,
        upper: SmoothFunction::scalar(1, m, parse("x1", 1, m).unwrap()),
        lower: SmoothFunction::scalar(1, m, parse(lower, 1, m).unwrap()),
        omega: Polyhedron::whole_space(1),
        k,
    }
}

const GRID_TOLERANCE: f64 = 0.05;

fn ac8() -> Outcome {
    let maps = [
        (
            "identity",
            scalar_problem("(y1-x1)^2/2", LowerSet::Box(BoxSet::unbounded(1)), 1),
            0.3,
        ),
        (
            "clamp",
            scalar_problem(
                "(y1-x1)^2/2",
                LowerSet::Box(BoxSet::new(vec![0.0], vec![1.0]).unwrap()),
                1,
            ),
            0.5,
        ),
        (
            "clamp@bound",
            scalar_problem(
                "(y1-x1)^2/2",
                LowerSet::Box(BoxSet::new(vec![0.0], vec![1.0]).unwrap()),
                1,
            ),
            1.0,
        ),
        (
            "constant",
            scalar_problem("(y1-0.25)^2", LowerSet::Box(BoxSet::unbounded(1)), 1),
            0.3,
        ),
        (
            "double slope",
            scalar_problem("(y1-2*x1)^2/2", LowerSet::Box(BoxSet::unbounded(1)), 1),
            0.1,
        ),
        (
            "two followers",
            scalar_problem(
                "(y1-x1)^2/2 + (y2+x1)^2/2",
                LowerSet::Box(BoxSet::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()),
                2,
            ),
            0.0,
        ),
    ];
    let radii = [0.1, 0.05, 0.02];
    let mut ordered = true;
    let mut identity_ok = false;
    let mut notes = Vec::new();
    for (name, p, x_bar) in &maps {
        let grid = if p.m == 1 {
            GridSpec::cube(1, -1.0, 2.0, 301, 20, 1e-12).unwrap()
        } else {
            GridSpec::cube(2, -0.5, 1.5, 41, 20, 1e-12).unwrap()
        };
        let map = |x: &[f64]| solve_lower_grid(p, x, &grid).map(|s| s.points);
        let y_bar = map(&[*x_bar]).unwrap()[0].clone();
        let xs = axis_samples(&[*x_bar], &radii);
        let calm = estimate_calmness(&map, &[*x_bar], &y_bar, &xs, 1.0).unwrap().modulus;
        let lip = estimate_lipschitz_like(&map, &[*x_bar], &y_bar, &xs, 1.0, radii[2])
            .unwrap()
            .modulus;
        ordered &= calm <= lip + GRID_TOLERANCE;
        if *name == "identity" {
            identity_ok = (calm - 1.0).abs() <= 0.05 && (lip - 1.0).abs() <= 0.05;
        }
        notes.push(format!("{name} {calm:.3}/{lip:.3}"));
    }
    outcome(
        ordered && identity_ok,
        format!(
            "calm/lip: {}; calm ≤ lip + {GRID_TOLERANCE} on all maps: {ordered}; identity within 1 ± 0.05: {identity_ok}",
            notes.join(", ")
        ),
    )
}

fn ac9() -> Outcome {
    let mut identical = 0;
    let mut total = 0;
    let mut branches = Vec::new();
    for file in CURATED.iter().chain(["degenerate.json", "half_line.json"].iter()) {
        for args in [vec!["check", file], vec!["cone", file, "--which", "gph"]] {
            let runs: Vec<String> = (0..3).map(|_| without_timing(&run_cli(&args).1)).collect();
            total += 1;
            if runs.windows(2).all(|w| w[0] == w[1]) {
                identical += 1;
            }
        }
        let (p, cands) = load(file);
        let opts = StationarityOptions::default();
        let labels: Vec<Option<String>> = (0..3)
            .map(|_| {
                check_m_stationarity(&p, &cands[0], &opts)
                    .ok()
                    .and_then(|o| o.certificate().map(|c| c.branch.clone()))
            })
            .collect();
        branches.push(labels.windows(2).all(|w| w[0] == w[1]));
    }
    let reproducible = branches.iter().all(|&b| b);
    outcome(
        identical == total && reproducible,
        format!("{identical}/{total} command pairs byte-identical over 3 runs; branch selection reproducible: {reproducible}"),
    )
}

fn ac10() -> Outcome {
    let golden = manifest().join("tests/golden");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&golden).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    let (mut matched, mut commands) = (0, std::collections::BTreeSet::new());
    let mut mismatched = Vec::new();
    for f in &files {
        let expected = std::fs::read_to_string(f).unwrap();
        let header = expected.lines().next().unwrap();
        let args: Vec<&str> = header.trim_start_matches("$ bilevel ").split(' ').collect();
        commands.insert(args[0].to_string());
        let (code, stdout) = run_cli(&args);
        let got = format!("{header}\nexit: {code}\n{}", without_timing(&stdout));
        if got == expected {
            matched += 1;
        } else {
            mismatched.push(f.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    let mut malformed: Vec<PathBuf> = std::fs::read_dir(fixtures().join("malformed"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    malformed.sort();
    let rejected = malformed
        .iter()
        .filter(|f| run_cli(&["check", f.to_str().unwrap()]).0 == 3)
        .count();
    let all_commands = ["check", "cone", "lower", "verify"]
        .iter()
        .all(|c| commands.contains(*c));
    outcome(
        matched == files.len() && all_commands && rejected == malformed.len(),
        format!(
            "{matched}/{} golden transcripts match (commands {:?}){}; {rejected}/{} malformed inputs exit 3",
            files.len(),
            commands,
            if mismatched.is_empty() {
                String::new()
            } else {
                format!(", mismatched {mismatched:?}")
            },
            malformed.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("AC1 normal-cone exactness", ac1),
        ("AC2 graph-cone closed form", ac2),
        ("AC3 non-convexity witness", ac3),
        ("AC4 certificate soundness", ac4),
        ("AC5 negative controls", ac5),
        ("AC6 smooth-calculus collapse", ac6),
        ("AC7 derivative correctness", ac7),
        ("AC8 calmness vs Lipschitz-like", ac8),
        ("AC9 determinism", ac9),
        ("AC10 CLI contract", ac10),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "[{}] {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "{} of 10 criteria passed in {:.1}s",
        10 - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
