//! Browser bindings for the demo page in `www/`.
//!
//! Each export has a plain Rust counterpart so the logic is testable natively.

use std::fmt::Write as _;

use wasm_bindgen::prelude::*;

use delibmatch::bounds::{heatmap, lower_bound_with_argmax, permissible_ranges, Family, HeatmapGrid};
use delibmatch::exactnum::{Field, QuadraticScalar as Q};
use delibmatch::protocol::{run_protocol, MatchingPolicy, Params};

fn scalar(text: &str) -> Result<Q, String> {
    text.trim().parse().map_err(|_| format!("cannot parse `{text}`"))
}

/// Row-major `[D, argmax]` pairs over a `steps x steps` cell-centered grid,
/// λ varying slowest. Cells outside the domain hold `NaN`.
pub fn heatmap_values(lambda_lo: f64, lambda_hi: f64, w_lo: f64, w_hi: f64, steps: usize) -> Vec<f64> {
    let grid = HeatmapGrid {
        lambda_range: (lambda_lo, lambda_hi),
        w_range: (w_lo, w_hi),
        lambda_steps: steps,
        w_steps: steps,
        include_optimum: false,
    };
    let h = heatmap(&grid);
    let hl = (lambda_hi - lambda_lo) / steps as f64;
    let hw = (w_hi - w_lo) / steps as f64;
    let mut out = vec![f64::NAN; 2 * steps * steps];
    for r in &h.rows {
        let i = ((r.lambda - lambda_lo) / hl).floor() as usize;
        let j = ((r.w - w_lo) / hw).floor() as usize;
        if i < steps && j < steps {
            out[2 * (i * steps + j)] = r.big_d;
            out[2 * (i * steps + j) + 1] = r.argmax as f64;
        }
    }
    out
}

/// Permissible ranges and closed forms at exact `(λ, w)`.
pub fn bound_report(lambda: &str, w: &str) -> Result<String, String> {
    let (l, w) = (scalar(lambda)?, scalar(w)?);
    let r = permissible_ranges(&l, &w).map_err(|e| e.to_string())?;
    let (big_d, d, argmax) = lower_bound_with_argmax(&l, &w).map_err(|e| e.to_string())?;
    let rows: [(&str, &Q); 10] = [
        ("AC_min", &r.ac_min),
        ("AC_max", &r.ac_max),
        ("CB_min", &r.cb_min),
        ("CB_max", &r.cb_max),
        ("tau", &r.tau),
        ("eta", &r.eta),
        ("d1", &d[0]),
        ("d2", &d[1]),
        ("d3", &d[2]),
        ("D", &big_d),
    ];
    let mut out = String::new();
    for (name, v) in rows {
        let _ = writeln!(out, "{name:>6} = {v}  ({:.6})", v.to_f64());
    }
    let _ = writeln!(out, "argmax = d{argmax}");
    Ok(out)
}

/// Runs the protocol on a lower-bound family and describes the outcome.
pub fn family_report(family: &str, lambda: &str, w: &str) -> Result<String, String> {
    let fam: Family = family.parse().map_err(|e: delibmatch::bounds::BoundsError| e.to_string())?;
    let (l, w) = (scalar(lambda)?, scalar(w)?);
    let params = Params::new(l.clone(), w.clone()).map_err(|e| e.to_string())?;
    let (inst, ties) = fam.instance(&l, &w).map_err(|e| e.to_string())?;
    let run = run_protocol(&inst, &ties, &params, &MatchingPolicy::ByOrder).map_err(|e| e.to_string())?;
    let names = &inst.candidates;
    let mut out = String::new();
    let _ = writeln!(out, "{fam} instance at lambda = {l}, w = {w}");
    for v in &inst.voters {
        let dists: Vec<String> = v.dist.iter().map(Q::to_string).collect();
        let _ = writeln!(out, "  {:<5} mass {}  distances ({})", v.name.as_deref().unwrap_or("?"), v.mass, dists.join(", "));
    }
    for (x, y) in [(0, 2), (2, 1), (0, 1)] {
        let f = run.tournament.f(x, y);
        let _ = writeln!(out, "f({},{}) = {}  ({:.6})", names[x], names[y], f, f.to_f64());
    }
    let wus: Vec<&str> = run.wus.iter().map(|&x| names[x].as_str()).collect();
    let _ = writeln!(out, "WUS = {{{}}}, winner {}, optimum {}", wus.join(", "), names[run.winner], names[run.optimal]);
    let _ = writeln!(out, "distortion = {}  ({:.6})", run.distortion, run.distortion.to_f64());
    Ok(out)
}

#[wasm_bindgen(js_name = heatmapValues)]
pub fn heatmap_values_js(lambda_lo: f64, lambda_hi: f64, w_lo: f64, w_hi: f64, steps: usize) -> Vec<f64> {
    heatmap_values(lambda_lo, lambda_hi, w_lo, w_hi, steps)
}

#[wasm_bindgen(js_name = boundReport)]
pub fn bound_report_js(lambda: &str, w: &str) -> Result<String, JsError> {
    bound_report(lambda, w).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = familyReport)]
pub fn family_report_js(family: &str, lambda: &str, w: &str) -> Result<String, JsError> {
    family_report(family, lambda, w).map_err(|e| JsError::new(&e))
}
