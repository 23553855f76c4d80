//! Acceptance criteria, one PASS/FAIL line each. Expected values come from
//! oracles computed here: closed-form spectra, dense eigenvalue counts, an
//! independent RK4 integrator and explicit determinant sign changes.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use orbitindex::criterion::{analyze_data, IndexReport, Verdict};
use orbitindex::flow::fundamental_solution;
use orbitindex::linearization::{assemble_b, preset, CoefficientData};
use orbitindex::maslov::{clm_index_graph_vs_diagonal, iota1_curve, stable_component_check, FnCurve};
use orbitindex::problem::ProblemSpec;
use orbitindex::spectral::{
    discretize, relative_morse_index, s0_bound, spectral_flow_cs, spectral_flow_generic, SpectralOptions,
};
use orbitindex::symplect::{standard_j, twisted_holonomy_positive, SpComponent};
use orbitindex::verification::clm_over_s;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Mat = DMatrix<f64>;

// Tolerances pinned by the acceptance criteria.
const NT: usize = 4096;
const NX: usize = 1024;
const RUNTIME_BUDGET_S: f64 = 120.0;
const SYMPLECTIC_TOL: f64 = 1e-9;
const TRACE_TOL: f64 = 1e-6;
const ORDER: f64 = 2.0;
const ORDER_TOL: f64 = 0.2;
const HOLONOMY_EPS: f64 = 1e-3;
const CLOSED_FORM_GAP: f64 = 0.05;

// ------------------------------------------------------------------ oracles

fn dim_ker(m: &Mat) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    sv.iter().filter(|&&s| s <= 1e-10).count()
}

fn negative_count(m: &Mat, tol: f64) -> usize {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.iter().filter(|&&l| l < -tol).count()
}

fn morse_tol(m: &Mat) -> f64 {
    1e-10 * m.norm().max(1.0)
}

/// #{ν : ν² < ω²} over ν = k + shift, k ∈ ℤ, each counted `mult` times.
fn lattice_below(omega: f64, shift: f64, mult: i64) -> i64 {
    let k = omega.ceil() as i64 + 2;
    (-k..=k).filter(|&j| (j as f64 + shift).abs() < omega).count() as i64 * mult
}

/// Morse index of −u″ − ω²u on [0, 2π] with u(2π) = A u(0), for the
/// unmodulated presets; eigenvalues (k + θ/2π)² − ω².
fn closed_form_index(name: &str, params: &Value) -> Option<i64> {
    if params.get("mass_modulation").is_some() || params.get("gyro").is_some() {
        return None;
    }
    if params.get("T").is_some_and(|t| (t.as_f64().unwrap() - 2.0 * PI).abs() > 1e-12) {
        return None;
    }
    let omegas: Vec<f64> = match params.get("omega") {
        Some(Value::Array(v)) => v.iter().map(|x| x.as_f64().unwrap()).collect(),
        Some(x) => vec![x.as_f64().unwrap()],
        None => return None,
    };
    match (name, params.get("holonomy")) {
        ("harmonic", _) => Some(omegas.iter().map(|&w| lattice_below(w, 0.0, 1)).sum()),
        ("twisted_harmonic", Some(Value::String(h))) if h == "minus_identity" => {
            Some(omegas.iter().map(|&w| lattice_below(w, 0.5, 1)).sum())
        }
        ("twisted_harmonic", Some(Value::String(h))) if h == "reflection" => {
            Some(lattice_below(omegas[0], 0.0, 1) + lattice_below(omegas[1], 0.5, 1))
        }
        ("twisted_harmonic", Some(Value::Object(o))) => {
            let th = o["rotation"].as_f64().unwrap();
            // u ↦ u₁ + iu₂ turns the rotation into e^{iθ}: complex lines, real multiplicity 2
            Some(lattice_below(omegas[0], th / (2.0 * PI), 2))
        }
        _ => None,
    }
}

/// Closed-form spectral index at T = 2π for the periodic harmonic oscillator.
fn harmonic_spec_closed_form(omega: f64) -> i64 {
    lattice_below(omega, 0.0, 1)
}

/// Mathieu ψ(π) in (y, u) = (u′, u) coordinates by classical RK4.
fn mathieu_rk4(a: f64, q: f64, steps: usize) -> Mat {
    let rhs = |t: f64, s: [f64; 2]| [s[1], -(a - 2.0 * q * (2.0 * t).cos()) * s[0]];
    let h = PI / steps as f64;
    let mut cols = Vec::new();
    // initial (u, u′): y-column then u-column
    for init in [[0.0, 1.0], [1.0, 0.0]] {
        let mut s = init;
        for i in 0..steps {
            let t = i as f64 * h;
            let k1 = rhs(t, s);
            let k2 = rhs(t + h / 2.0, [s[0] + h / 2.0 * k1[0], s[1] + h / 2.0 * k1[1]]);
            let k3 = rhs(t + h / 2.0, [s[0] + h / 2.0 * k2[0], s[1] + h / 2.0 * k2[1]]);
            let k4 = rhs(t + h, [s[0] + h * k3[0], s[1] + h * k3[1]]);
            for j in 0..2 {
                s[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        cols.push([s[1], s[0]]);
    }
    Mat::from_row_slice(2, 2, &[cols[0][0], cols[1][0], cols[0][1], cols[1][1]])
}

fn exp_minus_eps_j(n: usize, eps: f64) -> Mat {
    Mat::identity(2 * n, 2 * n) * eps.cos() - standard_j(n) * eps.sin()
}

fn block_diag2(a: &Mat) -> Mat {
    let n = a.nrows();
    let mut m = Mat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((n, n), (n, n)).copy_from(a);
    m
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Mat {
    let g = Mat::from_fn(n, n, |_, _| rng.gen_range(-scale..scale));
    (&g + g.transpose()) * 0.5
}

// ------------------------------------------------------------------ instances

type Instance = (&'static str, Value);

fn label(i: &Instance) -> String {
    format!("{} {}", i.0, i.1)
}

fn identity_suite() -> Vec<Instance> {
    let mut v: Vec<Instance> = Vec::new();
    for k in 0..14 {
        v.push(("harmonic", json!({"omega": 0.3 + 0.2 * k as f64, "T": 2.0 * PI})));
    }
    for a in [0.3, 0.8, 1.5, 2.6, 3.4, 4.8] {
        for q in [0.1, 0.3, 0.5, 0.7, 0.9] {
            v.push(("mathieu", json!({"a": a, "q": q})));
        }
    }
    for w in [0.2, 0.7, 1.1, 1.8, 2.3] {
        v.push(("twisted_harmonic", json!({"omega": w, "holonomy": "minus_identity"})));
    }
    for w in [[0.3, 0.7], [1.2, 0.4], [0.6, 1.9], [1.7, 1.3], [0.9, 0.2]] {
        v.push(("twisted_harmonic", json!({"omega": w, "holonomy": "reflection"})));
    }
    for (w, th) in [(0.5, 0.9), (1.1, 2.4), (0.3, 1.6), (1.4, 0.5), (0.85, 2.8)] {
        v.push(("twisted_harmonic", json!({"omega": [w, w], "holonomy": {"rotation": th}})));
    }
    v.push(("constant_indefinite", json!({})));
    v.push(("constant_indefinite", json!({"T": 1.5})));
    v
}

fn ten_presets() -> Vec<Instance> {
    vec![
        ("harmonic", json!({"omega": 1.4})),
        ("harmonic", json!({"omega": 0.0, "T": 1.0})),
        ("harmonic", json!({"omega": [0.6, 1.5], "gyro": 0.4})),
        ("harmonic", json!({"omega": 0.9, "mass_modulation": 0.25})),
        ("mathieu", json!({"a": 0.4, "q": 0.2})),
        ("mathieu", json!({"a": 2.0, "q": 0.6})),
        ("twisted_harmonic", json!({"omega": 0.8, "holonomy": "minus_identity", "mass_modulation": 0.2})),
        ("twisted_harmonic", json!({"omega": [0.5, 0.9], "holonomy": "reflection"})),
        ("twisted_harmonic", json!({"omega": [0.7, 0.7], "holonomy": {"rotation": 1.2}, "mass_modulation": 0.3})),
        ("constant_indefinite", json!({"T": 2.0})),
    ]
}

fn build(i: &Instance, nt: usize) -> Arc<CoefficientData> {
    Arc::new(preset(i.0, &i.1, nt).unwrap_or_else(|e| panic!("{}: {e}", label(i))))
}

fn analyze(i: &Instance, nt: usize, nx: usize) -> orbitindex::Result<IndexReport> {
    let spec = ProblemSpec::preset(i.0, i.1.clone()).with_grids(nt, nx);
    analyze_data(&build(i, nt), &spec)
}

// ------------------------------------------------------------------ criteria

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(bad: Vec<String>, summary: String) -> Outcome {
    let passed = bad.is_empty();
    let detail = if passed { summary } else { format!("{summary}; failures: {}", bad.join(" | ")) };
    Outcome { passed, detail }
}

fn c1_identity() -> Outcome {
    let t = Instant::now();
    let mut bad = Vec::new();
    let mut certified = 0;
    let suite = identity_suite();
    for inst in &suite {
        let data = build(inst, NT);
        let k = dim_ker(&(&data.a - Mat::identity(data.n, data.n))) as i64;
        match analyze(inst, NT, NX) {
            Ok(r) => {
                let residual = r.geo_index - r.spec_index - k;
                if !r.certified {
                    bad.push(format!("{}: uncertified", label(inst)));
                } else if residual != 0 {
                    bad.push(format!("{}: residual {residual}", label(inst)));
                } else {
                    certified += 1;
                }
                if let Some(e) = closed_form_index(inst.0, &inst.1) {
                    if r.spec_index != e || r.geo_index != e + k {
                        bad.push(format!("{}: (geo, spec) = ({}, {}) vs closed form ({}, {e})", label(inst), r.geo_index, r.spec_index, e + k));
                    }
                }
            }
            Err(e) => bad.push(format!("{}: {e}", label(inst))),
        }
    }
    let secs = t.elapsed().as_secs_f64();
    if certified < 60 {
        bad.push(format!("only {certified} certified"));
    }
    if secs > RUNTIME_BUDGET_S {
        bad.push(format!("runtime {secs:.1}s over budget"));
    }
    outcome(bad, format!("{certified}/{} certified, residual 0, closed forms matched, {secs:.1}s (<= {RUNTIME_BUDGET_S}s)", suite.len()))
}

fn c2_endpoint_formulas() -> Outcome {
    let cases: Vec<Instance> = vec![
        ("harmonic", json!({"omega": 0.6})),
        ("harmonic", json!({"omega": [1.1, 0.4], "mass_modulation": 0.35})),
        ("mathieu", json!({"a": 1.7, "q": 0.4})),
        ("twisted_harmonic", json!({"omega": 1.2, "holonomy": "minus_identity"})),
        ("twisted_harmonic", json!({"omega": [0.3, 1.4], "holonomy": "minus_identity", "mass_modulation": 0.45})),
        ("twisted_harmonic", json!({"omega": [0.6, 1.1], "holonomy": "reflection"})),
        ("twisted_harmonic", json!({"omega": [0.6, 1.1], "holonomy": "reflection", "mass_modulation": 0.3})),
        ("twisted_harmonic", json!({"omega": [1.3, 1.3], "holonomy": {"rotation": 0.7}})),
        ("twisted_harmonic", json!({"omega": [1.3, 1.3], "holonomy": {"rotation": 0.7}, "mass_modulation": 0.5})),
    ];
    let mut bad = Vec::new();
    for inst in &cases {
        let data = build(inst, NT);
        // n for A = I, dim ker(A − I) otherwise
        let expected = dim_ker(&(&data.a - Mat::identity(data.n, data.n))) as i64;
        let got = (|| {
            let b = assemble_b(&data, 0.0, s0_bound(&data))?;
            let path = fundamental_solution(&b, NT)?;
            clm_index_graph_vs_diagonal(&path, &data.a, &b)
        })();
        match got {
            Ok(r) if r.value == expected => {}
            Ok(r) => bad.push(format!("{}: clm {} vs {expected}", label(inst), r.value)),
            Err(e) => bad.push(format!("{}: {e}", label(inst))),
        }
    }
    outcome(bad, format!("{} cases at c = 0, s = s0 equal n or dim ker(A-I) exactly", cases.len()))
}

fn c3_soundness() -> Outcome {
    let (na, nq) = (30, 25);
    let mut bad = Vec::new();
    let (mut certified, mut stated, mut oracle_hits, mut oracle_stable) = (0, 0, 0, 0);
    for i in 0..na {
        for j in 0..nq {
            let a = -1.0 + 6.0 * i as f64 / (na - 1) as f64;
            let q = 2.0 * j as f64 / (nq - 1) as f64;
            let inst: Instance = ("mathieu", json!({"a": a, "q": q}));
            let Ok(r) = analyze(&inst, 1024, 256) else { continue };
            if !r.certified {
                continue;
            }
            certified += 1;
            let odd = r.geo_index.rem_euclid(2) == 1;
            let parity = r.verdict == Verdict::UnstableByParity;
            if r.floquet.linearly_stable && (parity || odd) {
                stated += 1;
                bad.push(format!("mathieu({a:.3},{q:.3}) flagged yet Floquet-stable"));
            }
            // strictly elliptic by the independent integrator
            let tr = mathieu_rk4(a, q, 4000).trace();
            if tr.abs() < 2.0 - 1e-3 {
                oracle_stable += 1;
                if parity || odd {
                    oracle_hits += 1;
                    bad.push(format!("mathieu({a:.3},{q:.3}) flagged yet |tr| = {:.4} < 2", tr.abs()));
                }
            }
        }
    }
    if certified < 600 {
        bad.push(format!("only {certified} certified"));
    }
    outcome(
        bad,
        format!(
            "{certified}/{} certified (>= 600), {stated} flagged-but-stable, {oracle_hits} flagged among {oracle_stable} RK4-elliptic points",
            na * nq
        ),
    )
}

fn c4_convex() -> Outcome {
    let mut bad = Vec::new();
    let mut closed = 0;
    for k in 1..=29 {
        let w = 0.1 * k as f64;
        if (w - w.round()).abs() <= CLOSED_FORM_GAP {
            continue;
        }
        let inst: Instance = ("harmonic", json!({"omega": w}));
        match spectral_flow_cs(&build(&inst, NT), &SpectralOptions::new(NX)) {
            Ok(sf) if sf.value == harmonic_spec_closed_form(w) => closed += 1,
            Ok(sf) => bad.push(format!("omega {w:.1}: spec {} vs closed form {}", sf.value, harmonic_spec_closed_form(w))),
            Err(e) => bad.push(format!("omega {w:.1}: {e}")),
        }
    }
    // dense eigenvalue count of the assembled operator on every P > 0 instance
    let nx = 256;
    let mut dense = 0;
    for inst in identity_suite().into_iter().chain(ten_presets()) {
        let data = build(&inst, 1024);
        if data.p_lower_bound() <= 0.0 {
            continue;
        }
        let r = (|| {
            let sf = spectral_flow_cs(&data, &SpectralOptions::new(nx))?;
            let op = discretize(&data, 1.0, 0.0, nx)?;
            Ok::<_, orbitindex::Error>((sf.value, negative_count(&op.to_dense(), 1e-7 * (1.0 + sf.s0)) as i64))
        })();
        match r {
            Ok((s, m)) if s == m => dense += 1,
            Ok((s, m)) => bad.push(format!("{}: spec {s} vs dense Morse {m}", label(&inst))),
            Err(e) => bad.push(format!("{}: {e}", label(&inst))),
        }
    }
    outcome(bad, format!("{closed} harmonic closed forms (|omega-k| > {CLOSED_FORM_GAP}) and {dense} dense Morse counts matched"))
}

fn c5_flow_equivalence() -> Outcome {
    let (nt, nx, samples) = (1024, 256, 64);
    let mut bad = Vec::new();
    let mut ok = 0;
    for inst in ten_presets() {
        let data = build(&inst, nt);
        for c in [0.0, 0.5, 1.0] {
            let r = (|| {
                let sf = spectral_flow_cs(&data, &SpectralOptions { c, ..SpectralOptions::new(nx) })?;
                let clm = clm_over_s(&data, c, sf.s0, nt, samples)?;
                let op = discretize(&data, c, 0.0, nx)?;
                let tau = 1e-7 * (1.0 + sf.s0);
                let start = negative_count(&op.to_dense(), tau) as i64;
                let end = negative_count(&op.at_shift(sf.s0).to_dense(), 0.0) as i64;
                Ok::<_, orbitindex::Error>((sf.value, clm, start - end))
            })();
            match r {
                Ok((sf, clm, dense)) if sf == -clm && sf == dense => ok += 1,
                Ok(v) => bad.push(format!("{} c={c}: (spfl, clm, dense) = {v:?}", label(&inst))),
                Err(e) => bad.push(format!("{} c={c}: {e}", label(&inst))),
            }
        }
    }
    outcome(bad, format!("{ok}/30 (preset, c) pairs: spfl = -clm = dense count difference"))
}

fn c6_flow_quality() -> Outcome {
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for inst in identity_suite().into_iter().chain(ten_presets()) {
        let data = build(&inst, NT);
        let path = assemble_b(&data, 1.0, 0.0).and_then(|b| fundamental_solution(&b, NT));
        let Ok(path) = path else {
            bad.push(format!("{}: flow failed", label(&inst)));
            continue;
        };
        let j = standard_j(data.n);
        for f in &path.frames {
            let r = (f.transpose() * &j * f - &j).norm() / f.norm().powi(2).max(1.0);
            worst = worst.max(r);
        }
        count += 1;
    }
    if worst > SYMPLECTIC_TOL {
        bad.push(format!("residual {worst:.2e}"));
    }
    let mut worst_trace: f64 = 0.0;
    let mut orders = Vec::new();
    for (a, q) in [(0.2, 0.1), (1.0, 0.5), (1.0, 0.3), (1.0, 0.0)] {
        let oracle = mathieu_rk4(a, q, 40_000);
        let inst: Instance = ("mathieu", json!({"a": a, "q": q}));
        let m: Vec<Mat> = [512, 1024, NT]
            .iter()
            .map(|&nt| {
                let b = assemble_b(&build(&inst, nt), 1.0, 0.0).unwrap();
                fundamental_solution(&b, nt).unwrap().end().clone()
            })
            .collect();
        let err = (m[2].trace() - oracle.trace()).abs();
        worst_trace = worst_trace.max(err);
        if err > TRACE_TOL {
            bad.push(format!("mathieu({a},{q}) trace error {err:.2e}"));
        }
        let order = ((&m[0] - &oracle).norm() / (&m[1] - &oracle).norm()).log2();
        if (order - ORDER).abs() > ORDER_TOL {
            bad.push(format!("mathieu({a},{q}) order {order:.3}"));
        }
        orders.push(format!("{order:.3}"));
    }
    outcome(
        bad,
        format!(
            "residual {worst:.2e} (<= {SYMPLECTIC_TOL:e}) on {count} presets, trace error {worst_trace:.2e} (<= {TRACE_TOL:e}), orders [{}] ({ORDER} ± {ORDER_TOL})",
            orders.join(", ")
        ),
    )
}

fn c7_sp_components() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut bad = Vec::new();
    let mut holonomy = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=4);
        let g = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let a = g.qr().q();
        let det = (exp_minus_eps_j(n, HOLONOMY_EPS) * block_diag2(&a) - Mat::identity(2 * n, 2 * n)).determinant();
        match twisted_holonomy_positive(&a, HOLONOMY_EPS) {
            Ok(true) if det > 0.0 => holonomy += 1,
            Ok(v) => bad.push(format!("holonomy n={n}: {v}, det {det:.3e}")),
            Err(e) => bad.push(format!("holonomy: {e}")),
        }
    }
    let mut stable = 0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=3);
        let mut rot = Mat::zeros(2 * n, 2 * n);
        for i in 0..n {
            let th: f64 = rng.gen_range(0.05..(2.0 * PI - 0.05));
            rot[(i, i)] = th.cos();
            rot[(i + n, i + n)] = th.cos();
            rot[(i, i + n)] = th.sin();
            rot[(i + n, i)] = -th.sin();
        }
        let gen = standard_j(n) * random_symmetric(&mut rng, 2 * n, 0.6);
        let g = gen.clone().exp();
        let m = &g * rot * (-gen).exp();
        let det = (exp_minus_eps_j(n, 1e-3) * &m - Mat::identity(2 * n, 2 * n)).determinant();
        match stable_component_check(&m, 1e-3) {
            Ok(SpComponent::Plus) if det > 0.0 => stable += 1,
            Ok(c) => bad.push(format!("stable matrix: {c:?}, det {det:.3e}")),
            Err(e) => bad.push(format!("stable matrix: {e}")),
        }
    }
    // parity of ι₁ against sign changes of det(ψ(t) − I), with ψ(0) = I
    // pushed off the diagonal by e^{−εJ}
    let mut parity = 0;
    let mut tried = 0;
    while parity < 50 && tried < 500 {
        tried += 1;
        let n = rng.gen_range(1..=2);
        let j = standard_j(n);
        let js1 = &j * random_symmetric(&mut rng, 2 * n, 3.0);
        let js2 = &j * random_symmetric(&mut rng, 2 * n, 3.0);
        let f = move |t: f64| (&js1 * t).exp() * (&js2 * (t * t)).exp();
        let id = Mat::identity(2 * n, 2 * n);
        let g = |m: &Mat| (m - &id).determinant();
        let fine = 8000;
        let mut dets = vec![g(&(exp_minus_eps_j(n, 1e-3) * f(0.0)))];
        dets.extend((1..=fine).map(|k| g(&f(k as f64 / fine as f64))));
        let end = f(1.0);
        let scale = end.norm().max(1.0).powi(2 * n as i32);
        // admissible: nondegenerate end, no near-tangential sample
        if dets.iter().skip(1).any(|d| d.abs() < 1e-9 * scale) {
            continue;
        }
        let changes = dets.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
        let grid: Vec<f64> = (0..=400).map(|k| k as f64 / 400.0).collect();
        match iota1_curve(&FnCurve::new(grid, f)) {
            Ok(r) if r.value.rem_euclid(2) as usize == changes % 2 => parity += 1,
            Ok(r) => bad.push(format!("parity: iota1 {} vs {changes} sign changes", r.value)),
            Err(e) => bad.push(format!("parity: {e}")),
        }
        if bad.len() > 10 {
            break;
        }
    }
    if parity < 50 {
        bad.push(format!("only {parity} parity paths checked"));
    }
    outcome(bad, format!("holonomy {holonomy}/100, stable Plus {stable}/100, parity lemma {parity}/50 paths"))
}

fn c8_surrogates() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut bad = Vec::new();
    let mut pairs = 0;
    for i in 0..200 {
        let d = rng.gen_range(1..=16);
        let s = random_symmetric(&mut rng, d, 1.0);
        let t = random_symmetric(&mut rng, d, 1.0);
        let expected = negative_count(&s, morse_tol(&s)) as i64 - negative_count(&t, morse_tol(&t)) as i64;
        match relative_morse_index(&s, &t) {
            Ok(v) if v == expected => pairs += 1,
            Ok(v) => bad.push(format!("pair {i} (d={d}): {v} vs {expected}")),
            Err(e) => bad.push(format!("pair {i}: {e}")),
        }
    }
    let mut paths = 0;
    let mut tried = 0;
    while paths < 50 && tried < 200 {
        tried += 1;
        let d = rng.gen_range(2..=12);
        let s = random_symmetric(&mut rng, d, 2.0);
        let g = Mat::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
        let pos = &g * g.transpose() + Mat::identity(d, d) * 0.2;
        let start = &s - &pos * 0.5;
        let q = move |t: f64| &start + &pos * t;
        let (m0, m1) = (q(0.0), q(1.0));
        let ends_regular = [&m0, &m1].iter().all(|m| {
            SymmetricEigen::new((*m).clone()).eigenvalues.iter().all(|l| l.abs() > 1e-6)
        });
        if !ends_regular {
            continue;
        }
        let grid: Vec<f64> = (0..=200).map(|k| k as f64 / 200.0).collect();
        let expected = negative_count(&m1, morse_tol(&m1)) as i64 - negative_count(&m0, morse_tol(&m0)) as i64;
        match spectral_flow_generic(&q, &grid) {
            Ok(sf) if -sf == expected => paths += 1,
            Ok(sf) => bad.push(format!("path: -spfl {} vs {expected}", -sf)),
            Err(e) => bad.push(format!("path: {e}")),
        }
    }
    outcome(bad, format!("relative Morse index {pairs}/200 pairs, monotone paths {paths}/50"))
}

fn c9_well_posedness() -> Outcome {
    let mut bad = Vec::new();
    let mut ok = 0;
    let suite = identity_suite();
    for inst in &suite {
        let data = build(inst, NT);
        let r = (|| {
            let base = spectral_flow_cs(&data, &SpectralOptions::new(NX))?;
            let doubled = spectral_flow_cs(&data, &SpectralOptions { s0: Some(2.0 * base.s0), ..SpectralOptions::new(NX) })?;
            let fine = spectral_flow_cs(&data, &SpectralOptions { grid_check: false, ..SpectralOptions::new(2 * NX) })?;
            Ok::<_, orbitindex::Error>((base.value, doubled.value, fine.value))
        })();
        match r {
            Ok((a, b, c)) if a == b && a == c => ok += 1,
            Ok(v) => bad.push(format!("{}: (base, 2s0, 2N_x) = {v:?}", label(inst))),
            Err(e) => bad.push(format!("{}: {e}", label(inst))),
        }
    }
    outcome(bad, format!("{ok}/{} instances unchanged under s0 -> 2s0 and N_x -> 2N_x", suite.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("index identity", c1_identity),
        ("=n and =dim ker(A-I) endpoint formulas", c2_endpoint_formulas),
        ("soundness of the parity criterion", c3_soundness),
        ("convex reduction", c4_convex),
        ("first/second-order spectral-flow equivalence", c5_flow_equivalence),
        ("flow quality", c6_flow_quality),
        ("Sp+/Sp- machinery", c7_sp_components),
        ("finite-dimensional surrogates", c8_surrogates),
        ("well-posedness in s0 and N_x", c9_well_posedness),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        if !o.passed {
            failed += 1;
        }
        println!(
            "acceptance {} [{}] {name}: {} ({:.1}s)",
            k + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
