//! The acceptance suite behind `orbitindex verify`: nine property checks
//! with exact integer targets and pinned numerical tolerances.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::criterion::{analyze_data, dim_ker_a_minus_i, IndexReport, Verdict};
use crate::error::Result;
use crate::flow::fundamental_solution;
use crate::linalg::{self, Mat};
use crate::linearization::{assemble_b, preset, CoefficientData};
use crate::maslov::{clm_index_graph_vs_diagonal, graph_index, iota1_curve, parity_is_even, stable_component_check, FnCurve};
use crate::problem::ProblemSpec;
use crate::spectral::{
    discretize, morse_index, morse_of, relative_morse_index, s0_bound, spectral_flow_cs, spectral_flow_generic,
    SpectralOptions, KERNEL_TOL,
};
use crate::symplect::{exp_hamiltonian, expm, standard_j, twisted_holonomy_positive, SpComponent};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Coarser grids and fewer random samples.
    pub quick: bool,
}

impl VerifyOptions {
    fn grids(&self) -> (usize, usize) {
        if self.quick {
            (1024, 256)
        } else {
            (4096, 1024)
        }
    }
}

/// A suite instance: preset name and parameters.
pub type Instance = (&'static str, Value);

/// Instances of the index-identity check.
pub fn identity_suite() -> Vec<Instance> {
    let mut v: Vec<Instance> = Vec::new();
    for i in 0..14 {
        v.push(("harmonic", json!({"omega": 0.3 + 0.2 * i as f64, "T": 2.0 * PI})));
    }
    for a in [0.1, 0.6, 1.4, 2.2, 3.1, 4.5] {
        for q in [0.05, 0.2, 0.4, 0.7, 1.0] {
            v.push(("mathieu", json!({"a": a, "q": q})));
        }
    }
    for w in [0.0, 0.4, 0.9, 1.3, 1.7] {
        v.push(("twisted_harmonic", json!({"omega": w, "holonomy": "minus_identity"})));
    }
    for w in [[0.4, 0.8], [1.3, 0.6], [0.7, 2.2], [0.2, 0.3], [1.6, 1.1]] {
        v.push(("twisted_harmonic", json!({"omega": w, "holonomy": "reflection"})));
    }
    for (w, th) in [(0.6, 0.7), (1.2, 2.0), (0.35, 1.1), (0.8, 2.9), (1.45, 0.4)] {
        v.push(("twisted_harmonic", json!({"omega": [w, w], "holonomy": {"rotation": th}})));
    }
    v.push(("constant_indefinite", json!({})));
    v.push(("constant_indefinite", json!({"T": 1.0})));
    v
}

/// Coefficient sets spanning every preset family (for flow and flow-equivalence checks).
pub fn preset_family() -> Vec<Instance> {
    vec![
        ("harmonic", json!({"omega": 1.3})),
        ("harmonic", json!({"omega": 0.0, "T": 1.0})),
        ("harmonic", json!({"omega": [0.7, 1.6], "gyro": 0.3})),
        ("harmonic", json!({"omega": 0.8, "mass_modulation": 0.3})),
        ("mathieu", json!({"a": 0.2, "q": 0.1})),
        ("mathieu", json!({"a": 1.0, "q": 0.5})),
        ("twisted_harmonic", json!({"omega": 0.9, "holonomy": "minus_identity"})),
        ("twisted_harmonic", json!({"omega": [0.4, 0.8], "holonomy": "reflection"})),
        ("twisted_harmonic", json!({"omega": [0.6, 0.6], "holonomy": {"rotation": 0.7}})),
        ("constant_indefinite", json!({})),
    ]
}

fn build(inst: &Instance, nt: usize) -> Result<Arc<CoefficientData>> {
    Ok(Arc::new(preset(inst.0, &inst.1, nt)?))
}

fn analyze_instance(inst: &Instance, nt: usize, nx: usize) -> Result<IndexReport> {
    let data = build(inst, nt)?;
    let spec = ProblemSpec::preset(inst.0, inst.1.clone()).with_grids(nt, nx);
    analyze_data(&data, &spec)
}

fn label(inst: &Instance) -> String {
    format!("{} {}", inst.0, inst.1)
}

fn timed(id: u8, name: &'static str, f: impl FnOnce() -> (bool, String)) -> CheckResult {
    let t = Instant::now();
    let (passed, detail) = f();
    CheckResult { id, name, passed, detail, seconds: t.elapsed().as_secs_f64() }
}

/// 1. geo − spec − dim ker(A − I) = 0 on ≥ 60 certified instances.
pub fn check_identity(opts: VerifyOptions) -> CheckResult {
    timed(1, "index identity", || {
        let (nt, nx) = opts.grids();
        let suite = identity_suite();
        let t = Instant::now();
        let out: Vec<_> = suite.par_iter().map(|i| (label(i), analyze_instance(i, nt, nx))).collect();
        let secs = t.elapsed().as_secs_f64();
        let mut certified = 0;
        let mut bad = Vec::new();
        for (name, r) in &out {
            match r {
                Ok(r) if r.certified && r.identity_residual == 0 => certified += 1,
                Ok(r) => bad.push(format!("{name}: residual {} certified {}", r.identity_residual, r.certified)),
                Err(e) => bad.push(format!("{name}: {e}")),
            }
        }
        let passed = bad.is_empty() && certified >= 60 && secs <= 120.0;
        (passed, format!("{certified}/{} certified with residual 0 in {secs:.1}s (need >= 60, <= 120s) {bad:?}", out.len()))
    })
}

/// 2. ι_CLM at (c, s) = (0, s₀) equals dim ker(A − I).
pub fn check_endpoint_formulas(opts: VerifyOptions) -> CheckResult {
    timed(2, "=n and =dim ker(A-I) formulas", || {
        let (nt, _) = opts.grids();
        let cases: Vec<Instance> = vec![
            ("harmonic", json!({"omega": 1.3})),
            ("harmonic", json!({"omega": [0.5, 1.7], "mass_modulation": 0.4})),
            ("harmonic", json!({"omega": [0.5, 1.7], "gyro": 0.6})),
            ("twisted_harmonic", json!({"omega": 0.7, "holonomy": "minus_identity"})),
            ("twisted_harmonic", json!({"omega": [0.7, 1.1], "holonomy": "minus_identity", "mass_modulation": 0.3})),
            ("twisted_harmonic", json!({"omega": [0.4, 0.8], "holonomy": "reflection"})),
            ("twisted_harmonic", json!({"omega": [0.4, 0.8], "holonomy": "reflection", "mass_modulation": 0.5})),
            ("twisted_harmonic", json!({"omega": [0.9, 0.9], "holonomy": {"rotation": 0.7}})),
            ("twisted_harmonic", json!({"omega": [0.9, 0.9], "holonomy": {"rotation": 0.7}, "mass_modulation": 0.4})),
        ];
        let mut bad = Vec::new();
        for inst in &cases {
            let r = (|| -> Result<(i64, usize)> {
                let data = build(inst, nt)?;
                let b = assemble_b(&data, 0.0, s0_bound(&data))?;
                let path = fundamental_solution(&b, nt)?;
                let idx = clm_index_graph_vs_diagonal(&path, &data.a, &b)?;
                Ok((idx.value, dim_ker_a_minus_i(&data.a, 1e-8)))
            })();
            match r {
                Ok((v, k)) if v == k as i64 => {}
                Ok((v, k)) => bad.push(format!("{}: clm {v} vs {k}", label(inst))),
                Err(e) => bad.push(format!("{}: {e}", label(inst))),
            }
        }
        (bad.is_empty(), format!("{} cases, mismatches {bad:?}", cases.len()))
    })
}

/// 3. No certified Mathieu point is UnstableByParity (or odd ι_geo) yet linearly stable.
pub fn check_soundness(opts: VerifyOptions) -> CheckResult {
    timed(3, "soundness of the parity criterion", || {
        let (na, nq, nt, nx) = if opts.quick { (30, 21, 512, 128) } else { (30, 25, 1024, 256) };
        let pts: Vec<(f64, f64)> = (0..na)
            .flat_map(|i| (0..nq).map(move |j| (-1.0 + 6.0 * i as f64 / (na - 1) as f64, 2.0 * j as f64 / (nq - 1) as f64)))
            .collect();
        let out: Vec<_> = pts
            .par_iter()
            .map(|&(a, q)| analyze_instance(&("mathieu", json!({"a": a, "q": q})), nt, nx))
            .collect();
        let mut certified = 0;
        let mut violations = 0;
        for r in out.iter().flatten() {
            if !r.certified {
                continue;
            }
            certified += 1;
            let odd = r.geo_index.rem_euclid(2) == 1;
            if r.floquet.linearly_stable && (r.verdict == Verdict::UnstableByParity || odd) {
                violations += 1;
            }
        }
        let passed = certified >= 600 && violations == 0;
        (passed, format!("{certified}/{} certified, {violations} contradictions (need >= 600, 0)", pts.len()))
    })
}

/// Morse index at T = 2π of −u″ − ω²u with periodic conditions.
pub fn harmonic_morse_closed_form(omega: f64) -> i64 {
    1 + 2 * (1..).take_while(|&k| (k as f64) < omega).count() as i64
}

/// 4. ι_spec equals the Morse index for P > 0 and the harmonic closed form.
pub fn check_convex_reduction(opts: VerifyOptions) -> CheckResult {
    timed(4, "convex reduction", || {
        let (nt, nx) = opts.grids();
        let mut cases: Vec<(Instance, Option<i64>)> = Vec::new();
        for i in 1..=29 {
            let w = 0.1 * i as f64;
            if (w - w.round()).abs() > 0.05 {
                cases.push((("harmonic", json!({"omega": w})), Some(harmonic_morse_closed_form(w))));
            }
        }
        for inst in preset_family().into_iter().chain(identity_suite()) {
            cases.push((inst, None));
        }
        let out: Vec<_> = cases
            .par_iter()
            .map(|(inst, expected)| {
                let r = (|| -> Result<Option<String>> {
                    let data = build(inst, nt)?;
                    if data.p_lower_bound() <= 0.0 {
                        return Ok(None);
                    }
                    let sf = spectral_flow_cs(&data, &SpectralOptions::new(nx))?;
                    let op = discretize(&data, 1.0, 0.0, nx)?;
                    let mi = morse_index(&op, KERNEL_TOL * (1.0 + sf.s0)) as i64;
                    let mut msg = Vec::new();
                    if sf.value != mi {
                        msg.push(format!("spec {} vs Morse {mi}", sf.value));
                    }
                    if let Some(e) = expected {
                        if sf.value != *e {
                            msg.push(format!("spec {} vs closed form {e}", sf.value));
                        }
                    }
                    Ok(Some(msg.join("; ")))
                })();
                (label(inst), r)
            })
            .collect();
        let mut checked = 0;
        let mut bad = Vec::new();
        for (name, r) in out {
            match r {
                Ok(Some(m)) if m.is_empty() => checked += 1,
                Ok(Some(m)) => bad.push(format!("{name}: {m}")),
                Ok(None) => {}
                Err(e) => bad.push(format!("{name}: {e}")),
            }
        }
        (bad.is_empty(), format!("{checked} convex instances agree, mismatches {bad:?}"))
    })
}

/// −ι_CLM(Δ, Gr(A_dψ_{c,s}(T)), s ∈ [0, s₀]) on a uniform s-grid.
pub fn clm_over_s(data: &Arc<CoefficientData>, c: f64, s0: f64, nt: usize, samples: usize) -> Result<i64> {
    let grid: Vec<f64> = (0..=samples).map(|i| s0 * i as f64 / samples as f64).collect();
    let ad = linalg::block_diag2(&data.a);
    let d = data.clone();
    let f = move |s: f64| -> Mat {
        let b = assemble_b(&d, c, s).expect("B assembles on validated data");
        let path = fundamental_solution(&b, nt).expect("step size checked on the first sample");
        &ad * path.end()
    };
    // surface step-size errors before the curve is sampled
    let b = assemble_b(data, c, s0)?;
    fundamental_solution(&b, nt)?;
    let k = 2 * data.n;
    Ok(graph_index(&FnCurve::new(grid, f), &Mat::identity(k, k))?.value)
}

/// 5. spfl(A_{c,s}) = −ι_CLM over s for c ∈ {0, ½, 1}.
pub fn check_flow_equivalence(opts: VerifyOptions) -> CheckResult {
    timed(5, "first/second-order spectral-flow equivalence", || {
        let (nt, nx, samples) = if opts.quick { (512, 128, 48) } else { (1024, 256, 64) };
        let jobs: Vec<(Instance, f64)> =
            preset_family().into_iter().flat_map(|i| [0.0, 0.5, 1.0].map(|c| (i.clone(), c))).collect();
        let out: Vec<_> = jobs
            .par_iter()
            .map(|(inst, c)| {
                let r = (|| -> Result<(i64, i64)> {
                    let data = build(inst, nt)?;
                    let sf = spectral_flow_cs(&data, &SpectralOptions { c: *c, ..SpectralOptions::new(nx) })?;
                    Ok((sf.value, clm_over_s(&data, *c, sf.s0, nt, samples)?))
                })();
                (format!("{} c={c}", label(inst)), r)
            })
            .collect();
        let mut bad = Vec::new();
        for (name, r) in &out {
            match r {
                Ok((sf, clm)) if *sf == -clm => {}
                Ok((sf, clm)) => bad.push(format!("{name}: spfl {sf} vs -clm {}", -clm)),
                Err(e) => bad.push(format!("{name}: {e}")),
            }
        }
        (bad.is_empty(), format!("{} (preset, c) pairs, mismatches {bad:?}", out.len()))
    })
}

/// ψ(π) for u″ + (a − 2q cos 2t)u = 0 by classical RK4, in the (y, u) = (u′, u)
/// ordering of the symplectic flow.
pub fn mathieu_monodromy_rk4(a: f64, q: f64, steps: usize) -> Mat {
    let f = |t: f64, y: [f64; 4]| {
        let w = a - 2.0 * q * (2.0 * t).cos();
        [y[1], -w * y[0], y[3], -w * y[2]]
    };
    let axpy = |y: [f64; 4], k: [f64; 4], s: f64| std::array::from_fn(|i| y[i] + s * k[i]);
    let h = PI / steps as f64;
    let mut y = [1.0, 0.0, 0.0, 1.0];
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = f(t, y);
        let k2 = f(t + h / 2.0, axpy(y, k1, h / 2.0));
        let k3 = f(t + h / 2.0, axpy(y, k2, h / 2.0));
        let k4 = f(t + h, axpy(y, k3, h));
        y = std::array::from_fn(|j| y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]));
    }
    // columns: (u, u′) from u(0) = 1 and from u′(0) = 1
    Mat::from_row_slice(2, 2, &[y[3], y[1], y[2], y[0]])
}

fn mathieu_monodromy(a: f64, q: f64, nt: usize) -> Result<Mat> {
    let data = build(&("mathieu", json!({"a": a, "q": q})), nt)?;
    let b = assemble_b(&data, 1.0, 0.0)?;
    Ok(fundamental_solution(&b, nt)?.end().clone())
}

/// Mathieu instances used for the trace oracle.
pub const MATHIEU_TRACE_POINTS: [(f64, f64); 4] = [(0.2, 0.1), (1.0, 0.5), (1.0, 0.3), (1.0, 0.0)];

/// 6. Symplectic residual, Mathieu trace accuracy, convergence order.
pub fn check_flow_quality(_opts: VerifyOptions) -> CheckResult {
    timed(6, "flow quality", || {
        let mut bad = Vec::new();
        let mut worst_res: f64 = 0.0;
        for inst in preset_family().into_iter().chain(identity_suite()) {
            let r = build(&inst, 4096).and_then(|d| {
                let b = assemble_b(&d, 1.0, 0.0)?;
                Ok(fundamental_solution(&b, 4096)?.relative_residual)
            });
            match r {
                Ok(res) => {
                    worst_res = worst_res.max(res);
                    if res > 1e-9 {
                        bad.push(format!("{}: residual {res:.2e}", label(&inst)));
                    }
                }
                Err(e) => bad.push(format!("{}: {e}", label(&inst))),
            }
        }
        let mut worst_trace: f64 = 0.0;
        let mut orders = Vec::new();
        for (a, q) in MATHIEU_TRACE_POINTS {
            let oracle = mathieu_monodromy_rk4(a, q, 100_000);
            let runs: Result<Vec<Mat>> = [512, 1024, 4096].iter().map(|&nt| mathieu_monodromy(a, q, nt)).collect();
            match runs {
                Ok(m) => {
                    let trace_err = (m[2].trace() - oracle.trace()).abs();
                    worst_trace = worst_trace.max(trace_err);
                    if trace_err > 1e-6 {
                        bad.push(format!("mathieu({a},{q}): trace error {trace_err:.2e}"));
                    }
                    let (e0, e1) = ((&m[0] - &oracle).norm(), (&m[1] - &oracle).norm());
                    let order = (e0 / e1).log2();
                    orders.push(order);
                    if (order - 2.0).abs() > 0.2 {
                        bad.push(format!("mathieu({a},{q}): order {order:.3}"));
                    }
                }
                Err(e) => bad.push(format!("mathieu({a},{q}): {e}")),
            }
        }
        let detail = format!(
            "max residual {worst_res:.2e} (<= 1e-9), max trace error {worst_trace:.2e} (<= 1e-6), orders {orders:.3?} (2.0 ± 0.2) {bad:?}"
        );
        (bad.is_empty() && !orders.is_empty(), detail)
    })
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let g = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let signs = Mat::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| r[(i, i)].signum()));
    q * signs
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Mat {
    let g = Mat::from_fn(n, n, |_, _| rng.gen_range(-scale..scale));
    linalg::symmetrize(&g)
}

/// A linearly stable symplectic matrix G·diag(e^{θ_i J})·G⁻¹.
pub fn random_stable_symplectic(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let mut rot = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        let th: f64 = rng.gen_range(0.1..(2.0 * PI - 0.1));
        rot[(i, i)] = th.cos();
        rot[(i + n, i + n)] = th.cos();
        rot[(i, i + n)] = th.sin();
        rot[(i + n, i)] = -th.sin();
    }
    let g = exp_hamiltonian(&random_symmetric(rng, 2 * n, 0.5));
    let ginv = g.clone().try_inverse().expect("symplectic matrices are invertible");
    g * rot * ginv
}

/// 7. Sp± machinery.
pub fn check_sp_components(opts: VerifyOptions) -> CheckResult {
    timed(7, "Sp± machinery", || {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let count = if opts.quick { 40 } else { 100 };
        let mut bad = Vec::new();
        let mut holonomy_ok = 0;
        for _ in 0..count {
            let n = rng.gen_range(1..=4);
            let a = random_orthogonal(&mut rng, n);
            match twisted_holonomy_positive(&a, 1e-3) {
                Ok(true) => holonomy_ok += 1,
                Ok(false) => bad.push(format!("holonomy not positive for n={n}")),
                Err(e) => bad.push(format!("holonomy: {e}")),
            }
        }
        let mut stable_ok = 0;
        for _ in 0..count {
            let n = rng.gen_range(1..=3);
            let m = random_stable_symplectic(&mut rng, n);
            match stable_component_check(&m, 1e-3) {
                Ok(SpComponent::Plus) => stable_ok += 1,
                Ok(c) => bad.push(format!("stable matrix classified {c:?}")),
                Err(e) => bad.push(format!("stable component: {e}")),
            }
        }
        let paths = if opts.quick { 20 } else { 50 };
        let mut parity_ok = 0;
        let mut parity_bad = 0;
        let mut attempts = 0;
        while parity_ok + parity_bad < paths && attempts < 10 * paths {
            attempts += 1;
            let n = rng.gen_range(1..=2);
            let s1 = random_symmetric(&mut rng, 2 * n, 3.0);
            let s2 = random_symmetric(&mut rng, 2 * n, 3.0);
            let j = standard_j(n);
            let (js1, js2) = (&j * &s1, &j * &s2);
            let f = move |t: f64| expm(&(&js1 * t)) * expm(&(&js2 * (t * t)));
            let grid: Vec<f64> = (0..=400).map(|k| k as f64 / 400.0).collect();
            let curve = FnCurve::new(grid, f.clone());
            let Ok(r) = iota1_curve(&curve) else { continue };
            let eps = r.epsilon_used.unwrap_or(1e-3);
            let Ok(even) = parity_is_even(&f(0.0), &f(1.0), eps) else { continue };
            if even == (r.value.rem_euclid(2) == 0) {
                parity_ok += 1;
            } else {
                parity_bad += 1;
                bad.push(format!("parity lemma: iota1 {} but parity_is_even {even}", r.value));
            }
        }
        let passed = bad.is_empty() && holonomy_ok == count && stable_ok == count && parity_ok >= paths;
        (
            passed,
            format!(
                "holonomy {holonomy_ok}/{count}, stable Plus {stable_ok}/{count}, parity lemma {parity_ok}/{paths} {bad:?}"
            ),
        )
    })
}

/// 8. Relative Morse index and the Morse-difference formula.
pub fn check_surrogates(opts: VerifyOptions) -> CheckResult {
    timed(8, "finite-dimensional surrogates", || {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pairs = if opts.quick { 60 } else { 200 };
        let mut bad = Vec::new();
        for i in 0..pairs {
            let d = rng.gen_range(1..=16);
            let s = random_symmetric(&mut rng, d, 1.0);
            // every fourth pair shares eigenvectors with S
            let t = if i % 4 == 0 {
                let eig = nalgebra::SymmetricEigen::new(s.clone());
                let shifted = eig.eigenvalues.map(|l| l + rng.gen_range(-0.5..0.5));
                &eig.eigenvectors * Mat::from_diagonal(&shifted) * eig.eigenvectors.transpose()
            } else {
                random_symmetric(&mut rng, d, 1.0)
            };
            match relative_morse_index(&s, &t) {
                Ok(v) if v == morse_of(&s) as i64 - morse_of(&t) as i64 => {}
                Ok(v) => bad.push(format!("pair {i}: {v} vs {}", morse_of(&s) as i64 - morse_of(&t) as i64)),
                Err(e) => bad.push(format!("pair {i}: {e}")),
            }
        }
        let paths = if opts.quick { 20 } else { 50 };
        let mut done = 0;
        while done < paths {
            let s = random_symmetric(&mut rng, 12, 2.0);
            let g = Mat::from_fn(12, 12, |_, _| rng.gen_range(-1.0..1.0));
            let pos = &g * g.transpose() + Mat::identity(12, 12) * 0.1;
            let start = &s - &pos * 0.5;
            let q = move |t: f64| &start + &pos * t;
            let grid: Vec<f64> = (0..=200).map(|k| k as f64 / 200.0).collect();
            let Ok(sf) = spectral_flow_generic(&q, &grid) else { continue };
            done += 1;
            let expected = morse_of(&q(1.0)) as i64 - morse_of(&q(0.0)) as i64;
            if -sf != expected {
                bad.push(format!("path: -spfl {} vs {expected}", -sf));
            }
        }
        (bad.is_empty(), format!("{pairs} pairs, {paths} monotone paths, mismatches {bad:?}"))
    })
}

/// 9. ι_spec unchanged under s₀ → 2s₀ and N_x → 2N_x.
pub fn check_well_posedness(opts: VerifyOptions) -> CheckResult {
    timed(9, "well-posedness in s0 and N_x", || {
        let (nt, nx) = opts.grids();
        let out: Vec<_> = identity_suite()
            .par_iter()
            .map(|inst| {
                let r = (|| -> Result<(i64, i64, i64)> {
                    let data = build(inst, nt)?;
                    let base = spectral_flow_cs(&data, &SpectralOptions::new(nx))?;
                    let doubled = spectral_flow_cs(&data, &SpectralOptions { s0: Some(2.0 * base.s0), ..SpectralOptions::new(nx) })?;
                    let fine = spectral_flow_cs(&data, &SpectralOptions { grid_check: false, ..SpectralOptions::new(2 * nx) })?;
                    Ok((base.value, doubled.value, fine.value))
                })();
                (label(inst), r)
            })
            .collect();
        let mut bad = Vec::new();
        for (name, r) in &out {
            match r {
                Ok((a, b, c)) if a == b && a == c => {}
                Ok(v) => bad.push(format!("{name}: {v:?}")),
                Err(e) => bad.push(format!("{name}: {e}")),
            }
        }
        (bad.is_empty(), format!("{} instances, mismatches {bad:?}", out.len()))
    })
}

pub fn run_all(opts: VerifyOptions) -> Vec<CheckResult> {
    vec![
        check_identity(opts),
        check_endpoint_formulas(opts),
        check_soundness(opts),
        check_convex_reduction(opts),
        check_flow_equivalence(opts),
        check_flow_quality(opts),
        check_sp_components(opts),
        check_surrogates(opts),
        check_well_posedness(opts),
    ]
}
