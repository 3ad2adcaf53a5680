//! File formats: trajectory CSV with fixed 17-significant-digit formatting,
//! flat JSON records for reports and metadata.

use qgalerkin::averaging::TransferReport;
use qgalerkin::propagator::Trajectory;
use serde_json::{Map, Number, Value};
use std::io::Write;
use std::path::Path;

/// 17 significant digits: round-trips f64 exactly and keeps files
/// byte-identical across runs.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header `t, re_1, im_1, ..., re_N, im_N, pop_1, ..., pop_N`.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> std::io::Result<()> {
    let n = traj.dim();
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    let mut header = String::from("t");
    for k in 1..=n {
        header.push_str(&format!(", re_{k}, im_{k}"));
    }
    for k in 1..=n {
        header.push_str(&format!(", pop_{k}"));
    }
    writeln!(w, "{header}")?;
    for (i, t) in traj.times().iter().enumerate() {
        let state = &traj.states()[i];
        let mut line = fmt_f64(*t);
        for a in state {
            line.push_str(", ");
            line.push_str(&fmt_f64(a.re));
            line.push_str(", ");
            line.push_str(&fmt_f64(a.im));
        }
        for a in state {
            line.push_str(", ");
            line.push_str(&fmt_f64(a.norm_sqr()));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()
}

fn num(x: f64) -> Value {
    Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

/// Flat key-value record for a transfer experiment, with enough integrator
/// context to replay the run.
pub fn transfer_record(model: &str, dim: usize, rep: &TransferReport) -> Value {
    let mut m = Map::new();
    m.insert("model".into(), Value::String(model.into()));
    m.insert("dimension".into(), Value::Number(dim.into()));
    m.insert("shape".into(), Value::String(rep.shape.clone()));
    m.insert("divisor".into(), Value::Number(rep.divisor.into()));
    m.insert("transition_j".into(), Value::Number(rep.transition.0.into()));
    m.insert("transition_k".into(), Value::Number(rep.transition.1.into()));
    m.insert("t_dagger".into(), num(rep.t_dagger));
    m.insert("p_dagger".into(), num(rep.p_dagger));
    m.insert("one_minus_p_dagger".into(), num(1.0 - rep.p_dagger));
    m.insert(
        "numerical_efficiency".into(),
        num(rep.numerical_efficiency),
    );
    m.insert(
        "literal_display_value".into(),
        num(rep.literal_display_value),
    );
    m.insert(
        "theoretical_efficiency".into(),
        num(rep.theoretical_efficiency),
    );
    m.insert("t_star".into(), num(rep.t_star));
    m.insert("c_constant".into(), num(rep.c_constant));
    m.insert("deficit_bound".into(), num(rep.deficit_bound));
    m.insert("horizon".into(), num(rep.horizon));
    m.insert("dt".into(), num(rep.step));
    m.insert(
        "warnings".into(),
        Value::String(rep.warnings.join("; ")),
    );
    Value::Object(m)
}

pub fn write_json(path: &Path, value: &Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)
}
