//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Random instances come from the seeded generators shared with the core
//! property tests; set `LOGRES_SEED` to vary them.

#[path = "../../core/tests/support/gen.rs"]
mod gen;
#[path = "../../core/tests/support/oracles.rs"]
mod oracles;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use serde_json::Value;

use logres_cli::{parse, print, Kind, Workspace};
use logres_core::canext::{canonical_extension, restrict, unshift, TauSection};
use logres_core::cohomology::{comparison_report, local_system_round_trip, underline, Side};
use logres_core::germ::{
    gauge_transform, germ_direct_sum, germ_dual, germ_tensor, is_fuchsian, pullback_germ, DiffModuleGerm,
};
use logres_core::lpk::{check_axioms, graded_piece, tensor};
use logres_core::monoid::{radical, AffineMonoid, MonoidIdeal};
use logres_core::rh::{from_lobject, higgs_decompose, is_flat, to_lobject, LogConnection, RhError};
use logres_core::strata::{hollow_layout, splitting_delta, strata_decomposition, Splitting};
use logres_core::Scalar;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn corpus(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(file)
}

fn workspace(file: &str) -> Workspace {
    let text = std::fs::read_to_string(corpus(file)).expect("corpus file");
    Workspace { doc: parse(&text).expect("corpus parses"), bound: None }
}

fn logres(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_logres")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn logres_json(args: &[&str]) -> Result<Value, String> {
    let (code, stdout) = logres(args);
    ensure!(code == 0, "`logres {}` exited with {code}", args.join(" "));
    serde_json::from_slice(&stdout).map_err(|e| e.to_string())
}

fn face_sets(p: &AffineMonoid) -> BTreeSet<Vec<usize>> {
    p.faces().iter().map(|f| f.generator_indices.clone()).collect()
}

fn strata_ground_truth() -> Outcome {
    let line = AffineMonoid::free(1);
    let strata = strata_decomposition(&line, &MonoidIdeal::empty());
    let ranks: BTreeSet<(usize, usize)> = strata.iter().map(|s| (s.torus_rank, s.log_rank)).collect();
    ensure!(ranks == BTreeSet::from([(1, 0), (0, 1)]), "ranks on N: {ranks:?}");
    let closed = strata.iter().find(|s| s.log_rank == 1).ok_or("no closed stratum")?;
    ensure!(closed.sharp_fiber_rank == 1, "fiber rank {} on the closed stratum", closed.sharp_fiber_rank);

    let a1 = corpus("a1.txt");
    let report = logres_json(&["strata", a1.to_str().unwrap()])?;
    let cli_ranks: BTreeSet<(u64, u64)> = report
        .as_array()
        .ok_or("strata report is not a list")?
        .iter()
        .map(|s| (s["torus_rank"].as_u64().unwrap(), s["log_rank"].as_u64().unwrap()))
        .collect();
    ensure!(cli_ranks == BTreeSet::from([(1, 0), (0, 1)]), "CLI ranks on N: {cli_ranks:?}");

    let plane = AffineMonoid::free(2);
    let strata = strata_decomposition(&plane, &MonoidIdeal::empty());
    ensure!(strata.len() == 4, "{} strata on N^2", strata.len());
    let ours: BTreeSet<Vec<usize>> = strata.iter().map(|s| s.face.generator_indices.clone()).collect();
    ensure!(ours == oracles::faces_by_functional_scan(&plane, 8), "strata of N^2 disagree with the face oracle");
    Ok("N: strata (1,0),(0,1), fiber rank 1; N^2: 4 strata".into())
}

fn face_and_radical_oracles() -> Outcome {
    let start = Instant::now();
    let ws = workspace("monoids.txt");
    let mut monoids = 0;
    let mut points = 0;
    for decl in ws.doc.of_kind(Kind::Monoid) {
        let p = ws.monoid(&decl.name).map_err(|e| e.to_string())?;
        ensure!(p.generators().len() <= 4 && p.ambient_rank() <= 3, "{} is outside the corpus bounds", decl.name);
        ensure!(face_sets(&p) == oracles::faces_by_functional_scan(&p, 8), "faces of {} disagree", decl.name);
        let mut ideals = vec![MonoidIdeal::maximal(&p)];
        ideals.extend(p.generators().iter().map(|g| MonoidIdeal::new(&p, vec![g.clone()]).unwrap()));
        let box_pts = oracles::box_points(&p, 2);
        for k in &ideals {
            let rad = radical(&p, k);
            for x in &box_pts {
                let expected = oracles::in_radical_by_multiples(&p, &k.generators, x, 40);
                ensure!(rad.contains(&p, x) == expected, "radical of {:?} in {} at {x:?}", k.generators, decl.name);
                points += 1;
            }
        }
        monoids += 1;
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    Ok(format!("{monoids} monoids, {points} radical memberships, {elapsed:.2?}"))
}

fn rh_round_trip() -> Outcome {
    let mut rng = gen::rng(3);
    for case in 0..200 {
        let conn = gen::constant_flat(&mut rng, 6, 3);
        let v = to_lobject(&conn).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(check_axioms(&v).is_valid(), "case {case}: invalid object");
        let back = from_lobject(&v).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(back == conn, "case {case}: from_lobject(to_lobject(conn)) != conn");
        ensure!(to_lobject(&back).unwrap() == v, "case {case}: to_lobject(from_lobject(v)) != v");
    }
    for case in 0..50 {
        let a = gen::constant_flat(&mut rng, 3, 2);
        let n = rng.gen_range(1..=3);
        let d = a.differentials.rank();
        let b = LogConnection::constant(a.monoid().clone(), a.ideal().clone(), gen::commuting_family(&mut rng, n, d, 6))
            .unwrap();
        let lhs = tensor(&to_lobject(&a).unwrap(), &to_lobject(&b).unwrap()).map_err(|e| e.to_string())?;
        let ab = a.tensor(&b).map_err(|e| e.to_string())?;
        ensure!(from_lobject(&lhs).unwrap() == ab, "pair {case}: tensor not preserved");
    }
    Ok("200 round trips, 50 tensor pairs".into())
}

fn higgs_equivalence() -> Outcome {
    let mut rng = gen::rng(4);
    let (mut ok, mut failed) = (0, 0);
    for case in 0..100 {
        let conn = gen::hollow_connection(&mut rng);
        let layout = hollow_layout(conn.monoid(), conn.ideal()).map_err(|e| e.to_string())?;
        let eps = if rng.gen_bool(0.5) { Splitting::universal(&layout) } else { Splitting::obvious(&layout) };
        match higgs_decompose(&conn, &eps) {
            Ok(_) => {
                ensure!(is_flat(&conn), "case {case}: decomposed a curved connection");
                ok += 1;
            }
            Err(RhError::ConditionsFailed(conds)) => {
                ensure!(!is_flat(&conn), "case {case}: rejected a flat connection");
                ensure!(!conds.is_empty(), "case {case}: no condition named");
                ensure!(conds.iter().all(|c| (1..=3).contains(&c.index())), "case {case}: bad condition index");
                failed += 1;
            }
            Err(e) => return Err(format!("case {case}: {e}")),
        }
    }
    Ok(format!("{ok} flat decomposed, {failed} curved rejected with named conditions"))
}

fn splitting_dependence() -> Outcome {
    let mut rng = gen::rng(5);
    let mut nontrivial = 0;
    for case in 0..50 {
        let conn = gen::hollow_constant_flat(&mut rng, 3);
        let layout = hollow_layout(conn.monoid(), conn.ideal()).map_err(|e| e.to_string())?;
        let t = layout.unit_rank() + rng.gen_range(0..=2);
        let mut pick = || Splitting {
            torus_rank: t,
            monomial_part: (0..layout.sharp_rank()).map(|_| (0..t).map(|_| rng.gen_range(-3..=3)).collect()).collect(),
            unit_part: (0..layout.sharp_rank()).map(|_| Scalar::from_int(rng.gen_range(1..=3))).collect(),
        };
        let (e0, e1) = (pick(), pick());
        let d = splitting_delta(&e0, &e1, &conn).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(d.difference.len() == t && d.contracted.len() == t, "case {case}: wrong component count");
        ensure!(d.difference == d.contracted, "case {case}: difference != (1 ⊗ δ) ∘ ρ");
        if d.difference.iter().any(|m| !m.is_zero()) {
            nontrivial += 1;
        }
    }
    Ok(format!("50 splitting pairs, {nontrivial} with nonzero difference"))
}

fn canonical_extension_equivalence() -> Outcome {
    let mut rng = gen::rng(6);
    let windows = ["(-1,0]", "(-1/2,1/2]", "(-2/3,1/3]", "(0,1]"];
    let mut v0_checked = 0;
    for case in 0..100 {
        let model = gen::embedding_model(&mut rng);
        ensure!(model.infinity_rank <= 3, "case {case}: r > 3");
        let tau: TauSection = windows[rng.gen_range(0..windows.len())].parse().unwrap();
        let vp = gen::object_over_q_prime(&mut rng, &model);
        let ext = canonical_extension(&model, &vp, &tau).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(check_axioms(&ext.object).is_valid(), "case {case}: extension violates the axioms");
        ensure!(ext.object.rank() == vp.rank(), "case {case}: rank changed");
        let back = restrict(&model, &ext.object).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(unshift(&back, &ext.shifts) == vp, "case {case}: restrict ∘ extend != id");
        let again = canonical_extension(&model, &back, &tau).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(again.object == ext.object, "case {case}: extend ∘ restrict != id");
        if tau.fixes_zero() {
            let zero = vec![Scalar::zero(); vp.directions()];
            ensure!(
                graded_piece(&ext.object, &zero).dimension == graded_piece(&vp, &zero).dimension,
                "case {case}: V_0 dimension changed"
            );
            v0_checked += 1;
        }
    }
    Ok(format!("100 objects, V_0 compared on {v0_checked}"))
}

fn corpus_germs() -> Vec<(String, DiffModuleGerm)> {
    let ws = workspace("germs.txt");
    ws.doc.of_kind(Kind::Germ).map(|d| (d.name.clone(), ws.germ(&d.name).expect("corpus germ"))).collect()
}

fn fuchs_against_oracle() -> Outcome {
    let start = Instant::now();
    let germs = corpus_germs();
    ensure!(germs.len() >= 30, "only {} corpus germs", germs.len());
    let mut regular = 0;
    for (name, g) in &germs {
        let ours = is_fuchsian(g).map_err(|e| format!("{name}: {e}"))?;
        ensure!(ours == oracles::fuchsian_by_saturation(g), "{name}: tester and oracle disagree");
        ensure!(ours == name.starts_with('R'), "{name}: classified as fuchsian={ours}");
        regular += usize::from(ours);
    }
    let named = |n: &str| germs.iter().find(|(m, _)| m == n).map(|(_, g)| g.clone());
    let gauged = named("R9").ok_or("corpus lacks [[0,0],[-2/t,1]]")?;
    ensure!(is_fuchsian(&gauged).unwrap(), "[[0,0],[-2/t,1]] must be regular");
    let pole = named("I1").ok_or("corpus lacks the t^-1 germ")?;
    ensure!(!is_fuchsian(&pole).unwrap(), "the t^-1 germ must be irregular");

    let mut rng = gen::rng(7);
    let small: Vec<&(String, DiffModuleGerm)> = germs.iter().filter(|(_, g)| g.rank() <= 2).collect();
    for case in 0..20 {
        let (name, g) = small[rng.gen_range(0..small.len())];
        let moved = gauge_transform(g, &gen::gauge(&mut rng, g.rank())).map_err(|e| e.to_string())?;
        let after = is_fuchsian(&moved).unwrap();
        ensure!(after == is_fuchsian(g).unwrap(), "gauge {case} on {name} changed the verdict");
        ensure!(after == oracles::fuchsian_by_saturation(&moved), "gauge {case} on {name}: oracle disagrees");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("{} germs ({regular} regular), 20 gauges, {elapsed:.2?}", germs.len()))
}

fn curve_germs_have_center() -> Outcome {
    let mut rng = gen::rng(8);
    for case in 0..50 {
        let conn = gen::constant_flat(&mut rng, 3, 2);
        let map = gen::germ_with_center(&mut rng, &conn);
        ensure!(map.has_center(conn.monoid()), "case {case}: generated map has no center");
        let g = pullback_germ(&conn, &map).map_err(|e| format!("case {case}: {e}"))?;
        ensure!(is_fuchsian(&g).unwrap(), "case {case}: pullback is irregular");
    }
    Ok("50 pullbacks regular".into())
}

fn regularity_closure() -> Outcome {
    let mut rng = gen::rng(9);
    for case in 0..30 {
        let n = rng.gen_range(1..=2);
        let a = gauge_transform(&gen::constant_germ(&mut rng, n), &gen::gauge(&mut rng, n)).unwrap();
        let m = rng.gen_range(1..=2);
        let b = gauge_transform(&gen::constant_germ(&mut rng, m), &gen::gauge(&mut rng, m)).unwrap();
        ensure!(is_fuchsian(&a).unwrap() && is_fuchsian(&b).unwrap(), "case {case}: inputs not regular");
        ensure!(is_fuchsian(&germ_tensor(&a, &b)).unwrap(), "case {case}: tensor irregular");
        ensure!(is_fuchsian(&germ_dual(&a)).unwrap(), "case {case}: dual irregular");
        ensure!(is_fuchsian(&germ_direct_sum(&a, &b)).unwrap(), "case {case}: direct sum irregular");
    }
    Ok("30 pairs closed under tensor, dual, direct sum".into())
}

fn comparison_suite() -> Outcome {
    let mut rng = gen::rng(10);
    let tau = TauSection::default();
    let mut adapted = 0;
    for case in 0..100 {
        let conn = gen::hollow_constant_flat(&mut rng, 3);
        let layout = hollow_layout(conn.monoid(), conn.ideal()).map_err(|e| e.to_string())?;
        let report = comparison_report(&conn, &Splitting::universal(&layout), &tau).map_err(|e| e.to_string())?;
        ensure!(report.dims(Side::DeRham) == report.dims(Side::GroupV0), "case {case}: de Rham != group(V_0)");
        if report.adapted && report.tau_fixes_zero {
            ensure!(report.dims(Side::GroupV0) == report.dims(Side::LocalSystem), "case {case}: local system differs");
            adapted += 1;
        }
    }
    let file = corpus("counterexample.txt");
    let report = logres_json(&["cohomology", "compare", file.to_str().unwrap()])?;
    let dims = |side: &str| -> Vec<u64> {
        report["sides"]
            .as_array()
            .into_iter()
            .flatten()
            .find(|s| s["side"] == side)
            .map(|s| s["dims"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect())
            .unwrap_or_default()
    };
    ensure!(dims("DeRham") == [0, 0, 0], "counterexample de Rham {:?}", dims("DeRham"));
    ensure!(dims("LocalSystem") == [1, 2, 1], "counterexample local system {:?}", dims("LocalSystem"));
    ensure!(report["adapted"] == false, "counterexample not flagged");
    Ok(format!("100 connections, {adapted} adapted; counterexample (0,0,0) vs (1,2,1) flagged"))
}

fn local_system_round_trips() -> Outcome {
    let mut rng = gen::rng(11);
    for case in 0..100 {
        let w = gen::local_system(&mut rng);
        ensure!(w.directions <= 3, "case {case}: r > 3");
        let p = AffineMonoid::free(w.directions);
        let out = local_system_round_trip(&w, &p, &MonoidIdeal::empty(), &TauSection::default())
            .map_err(|e| format!("case {case}: {e}"))?;
        ensure!(out.matches, "case {case}: underline ∘ build != id");
        ensure!(underline(&out.object) == out.recovered, "case {case}: recovered data inconsistent");
    }
    Ok("100 representations recovered".into())
}

fn cli_determinism() -> Outcome {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus(""))
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort();
    for f in &files {
        let text = std::fs::read_to_string(f).unwrap();
        let doc = parse(&text).map_err(|e| format!("{}: {e}", f.display()))?;
        let printed = print(&doc);
        let again = parse(&printed).map_err(|e| format!("{} reprinted: {e}", f.display()))?;
        ensure!(again == doc, "{}: reparse differs", f.display());
        ensure!(print(&again) == printed, "{}: printing is not idempotent", f.display());
    }

    let path = |f: &str| corpus(f).to_str().unwrap().to_string();
    let runs: Vec<Vec<String>> = vec![
        vec!["strata".into(), path("cone.txt")],
        vec!["faces".into(), "--json".into(), path("monoids.txt"), "M8".into()],
        vec!["higgs".into(), path("higgs.txt")],
        vec!["rh".into(), "to-lobject".into(), path("logpoint.txt")],
        vec!["rh".into(), "from-lobject".into(), path("lobject.txt")],
        vec!["canext".into(), "extend".into(), path("extension.txt")],
        vec!["germ".into(), "pullback".into(), path("pullback.txt")],
        vec!["germ".into(), "fuchs".into(), path("germs.txt"), "R19".into()],
        vec!["cohomology".into(), "compare".into(), path("counterexample.txt")],
        vec!["cohomology".into(), "koszul".into(), path("koszul.txt")],
        vec!["locsys".into(), "roundtrip".into(), path("locsys.txt")],
        vec!["strata".into(), "--dot".into(), path("plane.txt")],
    ];
    for args in &runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = logres(&args);
        ensure!(first.0 == 0, "`logres {}` exited with {}", args.join(" "), first.0);
        ensure!(logres(&args) == first, "`logres {}` output differs between runs", args.join(" "));
    }
    Ok(format!("{} documents reparse, {} reports byte-stable", files.len(), runs.len()))
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("stratification ground truth", strata_ground_truth),
        ("face and radical oracles", face_and_radical_oracles),
        ("RH round trip and monoidality", rh_round_trip),
        ("Higgs field equivalence", higgs_equivalence),
        ("dependence on the splitting", splitting_dependence),
        ("canonical extension equivalence", canonical_extension_equivalence),
        ("Fuchs tester against oracle", fuchs_against_oracle),
        ("curve germs with center", curve_germs_have_center),
        ("regularity closure", regularity_closure),
        ("comparison suite", comparison_suite),
        ("local system round trip", local_system_round_trips),
        ("CLI determinism and round trip", cli_determinism),
    ];
    // Keep failing criteria from printing panic backtraces over the report.
    std::panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.2}s]", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
}
