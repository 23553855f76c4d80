//! The index identity ι_geo = ι_spec + dim ker(A − I), the parity verdicts,
//! and the full analysis pipeline producing an [`IndexReport`].

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, StageExt};
use crate::flow::{floquet, fundamental_solution, monodromy, StabilityVerdict};
use crate::linalg::{self, Mat};
use crate::linearization::{assemble_b, validate, CoefficientData, ValidationReport};
use crate::maslov::{clm_index_graph_vs_diagonal, clm_index_vs_twisted_graph, IndexResult};
use crate::problem::ProblemSpec;
use crate::spectral::{s0_bound, spectral_flow_cs, SpectralFlowResult, SpectralOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    UnstableByParity,
    NoConclusion,
}

/// det A > 0 for an orthogonal A.
pub fn orientation(a: &Mat, tol: f64) -> Result<bool> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension("A must be square".into()));
    }
    let res = linalg::orthogonality_residual(a);
    if res > tol {
        return Err(Error::NotOrthogonal { residual: res });
    }
    Ok(a.determinant() > 0.0)
}

fn parity_rule(index: i64, n: usize, orientation_preserving: bool) -> Verdict {
    let odd = (index + n as i64).rem_euclid(2) == 1;
    if odd == orientation_preserving {
        Verdict::UnstableByParity
    } else {
        Verdict::NoConclusion
    }
}

/// Unstable when ι_spec + n is odd (orientation preserving) or even
/// (orientation reversing); otherwise no conclusion.
pub fn instability_verdict(spec_index: i64, n: usize, orientation_preserving: bool) -> Verdict {
    parity_rule(spec_index, n, orientation_preserving)
}

/// The same rule with the Morse index, valid for Legendre-convex data.
pub fn convex_verdict(morse_index: i64, n: usize, orientation_preserving: bool) -> Verdict {
    parity_rule(morse_index, n, orientation_preserving)
}

/// Smallest eigenvalue ℓ₀ of P over the samples, or an error if P ≯ 0.
pub fn legendre_convexity(data: &CoefficientData) -> Result<f64> {
    let l0 = data.p_lower_bound();
    if l0 > 0.0 {
        Ok(l0)
    } else {
        Err(Error::Validation(format!("P is not positive definite (min eigenvalue {l0:.3e})")))
    }
}

/// dim ker(A − I) by singular values at relative tolerance `tol`.
pub fn dim_ker_a_minus_i(a: &Mat, tol: f64) -> usize {
    let n = a.nrows();
    let (sv, _) = linalg::svd_sorted(&(a - Mat::identity(n, n)));
    sv.iter().filter(|&&s| s <= tol * a.norm().max(1.0)).count()
}

/// geo − spec − dim ker(A − I); both indices must be certified.
pub fn index_identity_check(geo: &IndexResult, spec: &SpectralFlowResult, dim_ker: usize) -> Result<i64> {
    if !geo.certified {
        return Err(Error::Uncertified("geometric index".into()));
    }
    if !spec.certified {
        return Err(Error::Uncertified("spectral index".into()));
    }
    Ok(geo.value - spec.value - dim_ker as i64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Effective {
    #[serde(rename = "N_t")]
    pub nt: usize,
    #[serde(rename = "N_x")]
    pub nx: usize,
    pub s0: f64,
    pub s0_bound: f64,
    pub tol_sym: f64,
    pub tol_rank: f64,
    pub tol_ode: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    pub validation: ValidationReport,
    pub symplectic_residual: f64,
    pub relative_symplectic_residual: f64,
    pub symplectic_ok: bool,
    pub geo: IndexResult,
    /// ι_CLM(Gr(A_dᵀ), Gr(ψ(t))); must equal the diagonal form.
    pub geo_twisted: i64,
    /// Geometric index recomputed at 2N_t.
    pub geo_refined: i64,
    pub geo_consistent: bool,
    pub spectral: SpectralFlowResult,
    /// geo ≡ spec + dim ker(A − I) (mod 2).
    pub parity_bridge: bool,
    /// n − dim ker(A − I) even; present when det A = 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orientation_parity: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub n: usize,
    #[serde(rename = "T")]
    pub period: f64,
    pub orientation_preserving: bool,
    pub dim_ker_a_minus_i: usize,
    pub geo_index: i64,
    pub spec_index: i64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub morse_index: Option<i64>,
    pub identity_residual: i64,
    /// A_dψ(T), row-major.
    pub monodromy: Vec<f64>,
    pub monodromy_trace: f64,
    pub floquet: StabilityVerdict,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convex_verdict: Option<Verdict>,
    /// The verdict (and an odd ι_geo) never contradict a certified Floquet
    /// classification.
    pub consistency: bool,
    /// All index certificates hold (symplectic residual, crossing
    /// regularity, grid stability, identity); Floquet ambiguity is reported
    /// separately in `floquet.certified`.
    pub certified: bool,
    pub certificates: Certificates,
    pub effective: Effective,
    pub warnings: Vec<String>,
}

/// validate → s₀ → ψ at (c, s) = (1, 0) → monodromy/Floquet → ι_geo →
/// ι_spec → identity → verdicts.
pub fn analyze(spec: &ProblemSpec) -> Result<IndexReport> {
    let data = Arc::new(spec.build().stage("ingest")?);
    analyze_data(&data, spec)
}

/// [`analyze`] on already built coefficients, with grids, tolerances and an
/// optional s₀ override taken from `spec`.
pub fn analyze_data(data: &Arc<CoefficientData>, spec: &ProblemSpec) -> Result<IndexReport> {
    let tol = spec.tolerances;
    let (nt, nx) = (spec.grids.nt, spec.grids.nx);
    let mut warnings = Vec::new();

    let validation = validate(data, tol.sym);
    if !validation.passed {
        let names: Vec<String> =
            validation.violations.iter().map(|v| format!("{} ({:.3e})", v.identity, v.residual)).collect();
        return Err(Error::Validation(names.join(", ")).at("validate"));
    }
    let orientation_preserving = orientation(&data.a, 1e-8).stage("validate")?;
    let bound = s0_bound(data);
    if !bound.is_finite() {
        return Err(Error::InvalidParameter("s0 bound is not finite".into()).at("s0_bound"));
    }

    let b = assemble_b(data, 1.0, 0.0).stage("fundamental_solution")?;
    let path = fundamental_solution(&b, nt).stage("fundamental_solution")?;
    let symplectic_ok = path.relative_residual <= tol.ode;
    if !symplectic_ok {
        warnings.push(format!("symplectic residual {:.3e} above {:.1e}", path.relative_residual, tol.ode));
    }
    let m = monodromy(&path, &data.a).stage("monodromy")?;
    let fl = floquet(&m, tol.ode);
    if !fl.certified {
        warnings.push("Floquet classification near a threshold".into());
    }

    let geo = clm_index_graph_vs_diagonal(&path, &data.a, &b).stage("clm_index")?;
    let twisted = clm_index_vs_twisted_graph(&path, &data.a, &b).stage("clm_index")?;
    let fine_path = fundamental_solution(&b, 2 * nt).stage("clm_index")?;
    let refined = clm_index_graph_vs_diagonal(&fine_path, &data.a, &b).stage("clm_index")?;
    let geo_consistent = twisted.value == geo.value && refined.value == geo.value;
    if !geo_consistent {
        warnings.push(format!(
            "geometric index {} vs twisted {} vs refined {}",
            geo.value, twisted.value, refined.value
        ));
    }
    warnings.extend(geo.diagnostics.iter().map(|d| format!("clm: {d}")));

    let opts = SpectralOptions { s0: spec.s0, ..SpectralOptions::new(nx) };
    let spectral = spectral_flow_cs(data, &opts).stage("spectral_index")?;
    warnings.extend(spectral.diagnostics.iter().map(|d| format!("spectral: {d}")));

    let dim_ker = dim_ker_a_minus_i(&data.a, tol.rank);
    let identity_residual = geo.value - spectral.value - dim_ker as i64;
    if let Err(e) = index_identity_check(&geo, &spectral, dim_ker) {
        warnings.push(format!("identity check: {e}"));
    } else if identity_residual != 0 {
        warnings.push(format!("index identity residual {identity_residual}"));
    }
    let parity_bridge = (geo.value - spectral.value - dim_ker as i64).rem_euclid(2) == 0;
    let orientation_parity =
        orientation_preserving.then(|| (data.n as i64 - dim_ker as i64).rem_euclid(2) == 0);

    let verdict = instability_verdict(spectral.value, data.n, orientation_preserving);
    let (morse_index, convex) = match legendre_convexity(data) {
        Ok(_) => {
            let mi = spectral.start_morse as i64;
            (Some(mi), Some(convex_verdict(mi, data.n, orientation_preserving)))
        }
        Err(_) => (None, None),
    };
    if convex.is_some_and(|v| v != verdict) {
        warnings.push("convex verdict differs from the spectral verdict".into());
    }
    let odd_geo = geo.value.rem_euclid(2) == 1;
    let consistency = !(fl.certified && fl.linearly_stable && (verdict == Verdict::UnstableByParity || odd_geo));
    if !consistency {
        warnings.push("parity verdict contradicts the Floquet classification".into());
    }

    let certified = symplectic_ok
        && geo.certified
        && geo_consistent
        && spectral.certified
        && identity_residual == 0
        && parity_bridge
        && orientation_parity.unwrap_or(true);

    Ok(IndexReport {
        n: data.n,
        period: data.period,
        orientation_preserving,
        dim_ker_a_minus_i: dim_ker,
        geo_index: geo.value,
        spec_index: spectral.value,
        morse_index,
        identity_residual,
        monodromy: m.transpose().iter().copied().collect(),
        monodromy_trace: m.trace(),
        floquet: fl,
        verdict,
        convex_verdict: convex,
        consistency,
        certified,
        effective: Effective {
            nt,
            nx,
            s0: spectral.s0,
            s0_bound: bound,
            tol_sym: tol.sym,
            tol_rank: tol.rank,
            tol_ode: tol.ode,
        },
        certificates: Certificates {
            validation,
            symplectic_residual: path.residual,
            relative_symplectic_residual: path.relative_residual,
            symplectic_ok,
            geo,
            geo_twisted: twisted.value,
            geo_refined: refined.value,
            geo_consistent,
            spectral,
            parity_bridge,
            orientation_parity,
        },
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn orientation_examples() {
        assert!(orientation(&Mat::identity(2, 2), 1e-10).unwrap());
        assert!(!orientation(&Mat::from_element(1, 1, -1.0), 1e-10).unwrap());
        let refl = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(!orientation(&refl, 1e-10).unwrap());
        assert!(orientation(&Mat::from_element(1, 1, 2.0), 1e-10).is_err());
    }

    #[test]
    fn verdict_examples() {
        assert_eq!(instability_verdict(0, 1, true), Verdict::UnstableByParity);
        assert_eq!(instability_verdict(1, 1, true), Verdict::NoConclusion);
        assert_eq!(instability_verdict(1, 1, false), Verdict::UnstableByParity);
        assert_eq!(instability_verdict(0, 1, false), Verdict::NoConclusion);
        assert_eq!(convex_verdict(3, 1, true), Verdict::NoConclusion);
    }

    #[test]
    fn free_particle_report() {
        let spec = ProblemSpec::preset("harmonic", json!({"omega": 0.0, "T": 1.0})).with_grids(512, 256);
        let r = analyze(&spec).unwrap();
        assert_eq!((r.geo_index, r.spec_index, r.dim_ker_a_minus_i, r.identity_residual), (1, 0, 1, 0));
        assert_eq!(r.verdict, Verdict::UnstableByParity);
        assert_eq!(r.morse_index, Some(0));
        assert!(!r.floquet.linearly_stable);
        assert!(r.consistency && r.certified, "{:?}", r.warnings);
    }

    #[test]
    fn antiperiodic_free_particle_report() {
        let spec = ProblemSpec::preset("twisted_harmonic", json!({"omega": 0.0, "T": 1.0, "holonomy": "minus_identity"}))
            .with_grids(512, 256);
        let r = analyze(&spec).unwrap();
        assert_eq!((r.geo_index, r.spec_index, r.dim_ker_a_minus_i, r.identity_residual), (0, 0, 0, 0));
        assert!(!r.orientation_preserving);
        assert!(r.certified, "{:?}", r.warnings);
    }
}
