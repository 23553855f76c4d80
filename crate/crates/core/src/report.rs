//! Serialized and human-readable forms of an [`IndexReport`].

use std::fmt::Write as _;

use crate::criterion::{IndexReport, Verdict};
use crate::error::{Error, Result};
use crate::sweep::format_float;

/// Pretty JSON with shortest round-trip floats; byte-identical across runs.
pub fn to_json(report: &IndexReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| Error::Spec(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn yes_no(b: bool) -> &'static str {
    if b { "yes" } else { "no" }
}

fn verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::UnstableByParity => "UnstableByParity (linearly unstable by the parity criterion)",
        Verdict::NoConclusion => "NoConclusion (the parity criterion is silent)",
    }
}

pub fn render_text(r: &IndexReport) -> String {
    let c = &r.certificates;
    let e = &r.effective;
    let mut out = String::new();
    let _ = writeln!(out, "orbitindex report");
    let _ = writeln!(out, "  dimension n            {}", r.n);
    let _ = writeln!(out, "  period T               {}", format_float(r.period));
    let _ = writeln!(out, "  A orientation          {}", if r.orientation_preserving { "preserving" } else { "reversing" });
    let _ = writeln!(out, "  dim ker(A - I)         {}", r.dim_ker_a_minus_i);
    let _ = writeln!(out);
    let _ = writeln!(out, "indices");
    let _ = writeln!(out, "  geometric (CLM)        {}", r.geo_index);
    let _ = writeln!(out, "  spectral               {}", r.spec_index);
    if let Some(m) = r.morse_index {
        let _ = writeln!(out, "  Morse (convex case)    {m}");
    }
    let _ = writeln!(out, "  identity residual      {}", r.identity_residual);
    let _ = writeln!(out, "  geo - spec - dim ker   {}", r.geo_index - r.spec_index - r.dim_ker_a_minus_i as i64);
    let _ = writeln!(out);
    let _ = writeln!(out, "verdict                  {}", verdict(r.verdict));
    if let Some(v) = r.convex_verdict {
        let _ = writeln!(out, "convex verdict           {}", verdict(v));
    }
    let _ = writeln!(out);
    let fl = &r.floquet;
    let _ = writeln!(out, "floquet multipliers");
    for m in &fl.multipliers {
        let geo = m.geometric.map(|g| g.to_string()).unwrap_or_else(|| "?".into());
        let _ = writeln!(
            out,
            "  {:>22} {:+.12}i  |z| = {:.12}  alg {} geo {}",
            format!("{:+.12}", m.re),
            m.im,
            m.value().norm(),
            m.algebraic,
            geo
        );
    }
    let _ = writeln!(out, "  max modulus            {}", format_float(fl.max_modulus));
    let _ = writeln!(out, "  spectrally stable      {}", yes_no(fl.spectrally_stable));
    let _ = writeln!(out, "  linearly stable        {}", yes_no(fl.linearly_stable));
    let _ = writeln!(out, "  floquet certified      {}", yes_no(fl.certified));
    let _ = writeln!(out, "  consistent with parity {}", yes_no(r.consistency));
    let _ = writeln!(out);
    let _ = writeln!(out, "certificates");
    let _ = writeln!(out, "  symplectic residual    {} (relative {})", format_float(c.symplectic_residual), format_float(c.relative_symplectic_residual));
    let _ = writeln!(out, "  symplectic ok          {}", yes_no(c.symplectic_ok));
    let _ = writeln!(out, "  CLM certified          {} ({} crossings)", yes_no(c.geo.certified), c.geo.crossings.len());
    let _ = writeln!(out, "  CLM twisted / refined  {} / {}", c.geo_twisted, c.geo_refined);
    let _ = writeln!(out, "  spectral certified     {} ({} crossings, s0 = {})", yes_no(c.spectral.certified), c.spectral.crossings.len(), format_float(c.spectral.s0));
    let _ = writeln!(out, "  parity bridge          {}", yes_no(c.parity_bridge));
    if let Some(p) = c.orientation_parity {
        let _ = writeln!(out, "  orientation parity     {}", yes_no(p));
    }
    let _ = writeln!(out, "  certified              {}", yes_no(r.certified));
    let _ = writeln!(out);
    let _ = writeln!(out, "effective settings");
    let _ = writeln!(out, "  N_t {}  N_x {}  s0 {}  (bound {})", e.nt, e.nx, format_float(e.s0), format_float(e.s0_bound));
    let _ = writeln!(out, "  tol sym {}  rank {}  ode {}", format_float(e.tol_sym), format_float(e.tol_rank), format_float(e.tol_ode));
    if !r.warnings.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "warnings");
        for w in &r.warnings {
            let _ = writeln!(out, "  - {w}");
        }
    }
    out
}
