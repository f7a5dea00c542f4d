use std::path::Path;

use nalgebra::DMatrix;
use serde_json::{json, Value};

use crosspoly::geometry::CrossPolytope;
use crosspoly::gluskin::{bm_estimate as estimate, gen_gluskin};
use crosspoly::params::{self, CONSTRAINT_NAMES, DEFAULT_GRID};

use crate::report::{fmt_opt, Table};
use crate::{read, CliError, Global, Outcome};

/// `{dims: [rows, cols], data: row-major}`.
pub fn matrix_json(m: &DMatrix<f64>) -> Value {
    let data: Vec<f64> = (0..m.nrows()).flat_map(|i| m.row(i).iter().copied().collect::<Vec<_>>()).collect();
    json!({ "dims": [m.nrows(), m.ncols()], "data": data })
}

/// Reads a matrix from a `{dims, data}` object, or from the `result` of a `gen` report.
pub fn matrix_from_json(v: &Value) -> Result<DMatrix<f64>, CliError> {
    let body = v.get("result").unwrap_or(v);
    let bad = |what: &str| CliError::usage(format!("matrix input: {what}"));
    let dims = body.get("dims").and_then(Value::as_array).ok_or_else(|| bad("missing dims"))?;
    let [rows, cols] = dims.as_slice() else {
        return Err(bad("dims must have two entries"));
    };
    let (rows, cols) = (
        rows.as_u64().ok_or_else(|| bad("dims must be integers"))? as usize,
        cols.as_u64().ok_or_else(|| bad("dims must be integers"))? as usize,
    );
    let data = body.get("data").and_then(Value::as_array).ok_or_else(|| bad("missing data"))?;
    if data.len() != rows * cols {
        return Err(bad(&format!("expected {} entries, found {}", rows * cols, data.len())));
    }
    let vals: Option<Vec<f64>> = data.iter().map(Value::as_f64).collect();
    let vals = vals.ok_or_else(|| bad("data must be numeric"))?;
    Ok(DMatrix::from_row_slice(rows, cols, &vals))
}

pub fn gen(g: &Global, seed: u64) -> Result<Outcome, CliError> {
    let n = g.dim(3)?;
    let m = g.cols(n * n * n);
    let gl = gen_gluskin(n, m, seed)?;
    let mut result = matrix_json(&gl.gamma);
    result["seed"] = json!(seed);
    let table = Table {
        header: (1..=m).map(|j| format!("g{j}")).collect(),
        rows: (0..n).map(|i| gl.gamma.row(i).iter().map(|v| v.to_string()).collect()).collect(),
    };
    Ok(Outcome { config: json!({ "n": n, "m": m }), passed: true, result, table: Some(table) })
}

pub fn sweep(g: &Global, grid: Option<&[f64]>, legacy: bool) -> Result<Outcome, CliError> {
    let grid = grid.unwrap_or(&DEFAULT_GRID);
    if let Some(&n) = grid.iter().find(|&&n| n < 3.0) {
        return Err(CliError::usage(format!("grid values must be at least 3, got {n}")));
    }
    let constants = g.constants()?;
    let rows = params::sweep(grid, &constants, legacy)?;
    let last = rows.last();
    let mut header: Vec<String> = ["n", "lambda", "s_tilde", "rho", "ratio"].iter().map(|s| s.to_string()).collect();
    header.extend(CONSTRAINT_NAMES.iter().map(|c| format!("margin_{c}")));
    header.extend(["all_hold", "slope", "exponent"].iter().map(|s| s.to_string()));
    if legacy {
        header.extend(["legacy_s_tilde", "legacy_rho", "legacy_exponent"].iter().map(|s| s.to_string()));
    }
    let table_rows = rows
        .iter()
        .map(|r| {
            let b = &r.balance;
            let mut cells = vec![b.n.to_string(), b.lambda.to_string(), b.s_tilde.to_string(), b.rho.to_string(), b.ratio.to_string()];
            for name in CONSTRAINT_NAMES {
                cells.push(fmt_opt(r.constraints.as_ref().and_then(|c| c.row(name)).map(|row| row.margin)));
            }
            cells.push(r.constraints.as_ref().map(|c| c.all_hold.to_string()).unwrap_or_default());
            cells.push(fmt_opt(r.slope));
            cells.push(fmt_opt(r.exponent));
            if legacy {
                cells.push(fmt_opt(r.legacy.map(|l| l.s_tilde)));
                cells.push(fmt_opt(r.legacy.map(|l| l.rho)));
                cells.push(fmt_opt(r.legacy_exponent));
            }
            cells
        })
        .collect();
    let result = json!({
        "rows": rows,
        "slope": last.and_then(|r| r.slope),
        "exponent": last.and_then(|r| r.exponent),
        "legacy_exponent": last.and_then(|r| r.legacy_exponent),
    });
    Ok(Outcome {
        config: json!({ "grid": grid, "legacy_exponent": legacy, "constants": constants }),
        passed: true,
        result,
        table: Some(Table { header, rows: table_rows }),
    })
}

pub fn bm_estimate(g: &Global, input: Option<&Path>, restarts: usize, seed: u64) -> Result<Outcome, CliError> {
    let (gamma, source) = match input {
        Some(p) => {
            let v: Value = serde_json::from_str(&read(p)?).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
            (matrix_from_json(&v)?, json!({ "input": p.display().to_string() }))
        }
        None => {
            let n = g.dim(3)?;
            let m = g.cols(n * n * n);
            (gen_gluskin(n, m, seed)?.gamma, json!({ "gluskin": { "n": n, "m": m } }))
        }
    };
    let k = CrossPolytope::new(gamma)?;
    let est = estimate(&k, restarts, seed)?;
    let result = json!({
        "rho": est.rho,
        "witness": matrix_json(&est.witness),
        "restarts": est.restarts,
        "evaluations": est.evaluations,
        "heuristic": est.heuristic,
    });
    Ok(Outcome {
        config: json!({ "source": source, "dims": [k.dim(), k.len()], "restarts": restarts }),
        passed: true,
        result,
        table: None,
    })
}

pub fn params(g: &Global) -> Result<Outcome, CliError> {
    let n = g.n.unwrap_or(1e6);
    let constants = g.constants()?;
    let p = params::derive_params(n, &constants)?;
    let report = params::check_constraints(&p);
    Ok(Outcome {
        config: json!({ "n": n, "constants": constants }),
        passed: true,
        result: json!({ "params": p, "constraints": report }),
        table: None,
    })
}
