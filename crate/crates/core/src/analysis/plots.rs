use std::io::Write;

use super::metrics::StepResponse;
use super::report::ModelReport;
use crate::dynamics::{fmt_num, TrajectoryData};
use crate::error::Result;
use crate::nicore::{freq_response, phase_deg, ContinuousLinearModel};

fn header_comment<W: Write>(w: &mut W, provenance: Option<&str>) -> Result<()> {
    if let Some(p) = provenance {
        for line in p.lines() {
            writeln!(w, "# config={line}")?;
        }
    }
    Ok(())
}

fn channel(prefix: &str, k: usize, count: usize) -> String {
    if count == 1 {
        prefix.to_string()
    } else {
        format!("{prefix}{}", k + 1)
    }
}

/// `t,y_true,y_<model>,...`; cells of models without a prediction are empty.
pub fn write_timeseries_csv<W: Write>(
    mut w: W,
    truth: &TrajectoryData,
    models: &[ModelReport],
    provenance: Option<&str>,
) -> Result<()> {
    header_comment(&mut w, provenance)?;
    let l = truth.output_dim();
    let mut header = vec!["t".to_string()];
    for k in 0..l {
        let y = channel("y", k, l);
        header.push(format!("{y}_true"));
        header.extend(models.iter().map(|m| format!("{y}_{}", m.name)));
    }
    writeln!(w, "{}", header.join(","))?;
    for j in 0..truth.outputs.rows() {
        let mut cells = vec![fmt_num(truth.time(j))];
        for k in 0..l {
            cells.push(fmt_num(truth.outputs[(j, k)]));
            for m in models {
                cells.push(match &m.predicted_outputs {
                    Some(y) if j < y.rows() && k < y.cols() => fmt_num(y[(j, k)]),
                    _ => String::new(),
                });
            }
        }
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Long format `model,omega,output,input,magnitude_db,phase_deg`.
pub fn write_bode_csv<W: Write>(
    mut w: W,
    models: &[(String, ContinuousLinearModel)],
    omegas: &[f64],
    provenance: Option<&str>,
) -> Result<()> {
    header_comment(&mut w, provenance)?;
    writeln!(w, "model,omega,output,input,magnitude_db,phase_deg")?;
    for (name, c) in models {
        let gs = freq_response(c, omegas)?;
        for (om, g) in omegas.iter().zip(&gs) {
            for i in 0..c.output_dim() {
                for j in 0..c.input_dim() {
                    let v = g[(i, j)];
                    let db = 20.0 * v.norm().log10();
                    let cells = [
                        name.clone(),
                        fmt_num(*om),
                        (i + 1).to_string(),
                        (j + 1).to_string(),
                        fmt_num(db),
                        fmt_num(phase_deg(v)),
                    ];
                    writeln!(w, "{}", cells.join(","))?;
                }
            }
        }
    }
    Ok(())
}

/// Long format `model,omega,output,input,re,im`.
pub fn write_nyquist_csv<W: Write>(
    mut w: W,
    models: &[(String, ContinuousLinearModel)],
    omegas: &[f64],
    provenance: Option<&str>,
) -> Result<()> {
    header_comment(&mut w, provenance)?;
    writeln!(w, "model,omega,output,input,re,im")?;
    for (name, c) in models {
        let gs = freq_response(c, omegas)?;
        for (om, g) in omegas.iter().zip(&gs) {
            for i in 0..c.output_dim() {
                for j in 0..c.input_dim() {
                    let v = g[(i, j)];
                    let cells = [
                        name.clone(),
                        fmt_num(*om),
                        (i + 1).to_string(),
                        (j + 1).to_string(),
                        fmt_num(v.re),
                        fmt_num(v.im),
                    ];
                    writeln!(w, "{}", cells.join(","))?;
                }
            }
        }
    }
    Ok(())
}

/// Long format `model,t,output,input,y`.
pub fn write_step_csv<W: Write>(mut w: W, responses: &[(String, StepResponse)], provenance: Option<&str>) -> Result<()> {
    header_comment(&mut w, provenance)?;
    writeln!(w, "model,t,output,input,y")?;
    for (name, r) in responses {
        for (j, seq) in r.outputs.iter().enumerate() {
            for k in 0..seq.rows() {
                for i in 0..seq.cols() {
                    let cells = [
                        name.clone(),
                        fmt_num(k as f64 * r.dt),
                        (i + 1).to_string(),
                        (j + 1).to_string(),
                        fmt_num(seq[(k, i)]),
                    ];
                    writeln!(w, "{}", cells.join(","))?;
                }
            }
        }
    }
    Ok(())
}
